//! Transmission-efficiency calculus: secret bits per channel use, the
//! transmittance-corrected practical figure, and crossover points between
//! schemes with monomial practical-efficiency curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyInput {
    /// Expected secret bits received per round (b_s).
    pub secret_bits: f64,
    /// Qubits sent on the quantum channel per round (q_t).
    pub quantum_transmissions: f64,
    /// Classical bits exchanged per round (b_t).
    pub classical_bits: f64,
    /// Channel transmittance, in (0, 1].
    pub transmittance: f64,
    /// Power of the transmittance in the practical figure.
    pub trips_exponent: i32,
}

impl EfficiencyInput {
    pub fn validate(&self) -> Result<()> {
        if self.quantum_transmissions + self.classical_bits <= 0.0 {
            return Err(Error::Config(
                "efficiency: quantum_transmissions + classical_bits must be positive".into(),
            ));
        }
        if !(self.transmittance > 0.0 && self.transmittance <= 1.0) {
            return Err(Error::Config(
                "transmittance: must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// This laboratory's scheme: one secret bit per qubit, no classical
    /// traffic, cubic transmittance dependence.
    pub fn scheme(tau: f64) -> Self {
        EfficiencyInput {
            secret_bits: 1.0,
            quantum_transmissions: 1.0,
            classical_bits: 0.0,
            transmittance: tau,
            trips_exponent: 3,
        }
    }

    /// Four-state prepare-and-measure reference: half a secret bit per
    /// qubit plus two classical bits, single trip.
    pub fn bb84(tau: f64) -> Self {
        EfficiencyInput {
            secret_bits: 0.5,
            quantum_transmissions: 1.0,
            classical_bits: 2.0,
            transmittance: tau,
            trips_exponent: 1,
        }
    }

    /// Lucamarini-Mancini two-way reference: epsilon = 1/2, single trip.
    pub fn lucamarini_mancini(tau: f64) -> Self {
        EfficiencyInput {
            secret_bits: 0.5,
            quantum_transmissions: 1.0,
            classical_bits: 0.0,
            transmittance: tau,
            trips_exponent: 1,
        }
    }
}

/// epsilon = b_s / (q_t + b_t).
pub fn efficiency(input: &EfficiencyInput) -> Result<f64> {
    input.validate()?;
    Ok(input.secret_bits / (input.quantum_transmissions + input.classical_bits))
}

/// epsilon' = epsilon * tau^trips_exponent.
pub fn practical_efficiency(input: &EfficiencyInput) -> Result<f64> {
    Ok(efficiency(input)? * input.transmittance.powi(input.trips_exponent))
}

/// Transmittance at which two monomial practical-efficiency curves cross,
/// solved in closed form. Errors when the curves do not cross inside (0, 1].
pub fn crossover_tau(a: &EfficiencyInput, b: &EfficiencyInput) -> Result<f64> {
    let ea = efficiency(a)?;
    let eb = efficiency(b)?;
    let de = a.trips_exponent - b.trips_exponent;
    if de == 0 {
        return Err(Error::Config(
            "crossover: schemes share the transmittance exponent; no unique crossing".into(),
        ));
    }
    let tau = (eb / ea).powf(1.0 / de as f64);
    if !(tau > 0.0 && tau <= 1.0) || !tau.is_finite() {
        return Err(Error::Config(format!(
            "crossover: curves cross at tau = {tau:.4}, outside (0, 1]"
        )));
    }
    Ok(tau)
}

/// Summary block embedded in every experiment report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyBlock {
    pub scheme_epsilon: f64,
    pub bb84_epsilon: f64,
    pub lucamarini_mancini_epsilon: f64,
    pub trips_exponent: i32,
    pub crossover_vs_bb84: f64,
    pub crossover_vs_lucamarini_mancini: f64,
}

impl EfficiencyBlock {
    pub fn standard() -> Self {
        let scheme = EfficiencyInput::scheme(1.0);
        let bb84 = EfficiencyInput::bb84(1.0);
        let lm = EfficiencyInput::lucamarini_mancini(1.0);
        EfficiencyBlock {
            scheme_epsilon: efficiency(&scheme).expect("valid"),
            bb84_epsilon: efficiency(&bb84).expect("valid"),
            lucamarini_mancini_epsilon: efficiency(&lm).expect("valid"),
            trips_exponent: scheme.trips_exponent,
            crossover_vs_bb84: crossover_tau(&scheme, &bb84).expect("crosses"),
            crossover_vs_lucamarini_mancini: crossover_tau(&scheme, &lm).expect("crosses"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scheme_efficiency_is_one() {
        assert!((efficiency(&EfficiencyInput::scheme(1.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bb84_efficiency_is_one_sixth() {
        assert!((efficiency(&EfficiencyInput::bb84(1.0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn zero_secret_bits_gives_zero() {
        let mut input = EfficiencyInput::scheme(0.5);
        input.secret_bits = 0.0;
        assert_eq!(efficiency(&input).unwrap(), 0.0);
    }

    #[test]
    fn practical_examples() {
        let s = EfficiencyInput::scheme(0.9);
        assert!((practical_efficiency(&s).unwrap() - 0.729).abs() < 1e-12);
        let s = EfficiencyInput::scheme(1.0);
        assert!((practical_efficiency(&s).unwrap() - efficiency(&s).unwrap()).abs() < 1e-15);
        let b = EfficiencyInput::bb84(0.6);
        assert!((practical_efficiency(&b).unwrap() - 0.6 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn crossover_examples() {
        let s = EfficiencyInput::scheme(1.0);
        let tau = crossover_tau(&s, &EfficiencyInput::bb84(1.0)).unwrap();
        assert!((tau - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        let tau = crossover_tau(&s, &EfficiencyInput::lucamarini_mancini(1.0)).unwrap();
        assert!((tau - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(crossover_tau(&s, &s.clone()).is_err());
    }

    #[test]
    fn invalid_inputs_rejected() {
        let mut input = EfficiencyInput::scheme(1.0);
        input.quantum_transmissions = 0.0;
        assert!(efficiency(&input).is_err());
        let mut input = EfficiencyInput::scheme(1.0);
        input.transmittance = 0.0;
        assert!(efficiency(&input).is_err());
    }

    proptest! {
        #[test]
        fn practical_strictly_increases_in_tau(t1 in 0.01f64..0.99, dt in 0.001f64..0.01) {
            let lo = practical_efficiency(&EfficiencyInput::scheme(t1)).unwrap();
            let hi = practical_efficiency(&EfficiencyInput::scheme(t1 + dt)).unwrap();
            prop_assert!(hi > lo);
        }

        #[test]
        fn efficiency_strictly_decreases_in_classical_bits(b1 in 0.0f64..5.0, db in 0.01f64..1.0) {
            let mut a = EfficiencyInput::bb84(1.0);
            a.classical_bits = b1;
            let mut b = a;
            b.classical_bits = b1 + db;
            prop_assert!(efficiency(&b).unwrap() < efficiency(&a).unwrap());
        }
    }
}
