//! Three-party secret sharing over a reusable GHZ key, and its
//! higher-dimensional repair.
//!
//! Odd rounds encode the bit on a carrier pair |q,q> via two controlled
//! gates from Alice's key particle; Bob and Charlie invert with their own
//! key particles and each read the bit. Even rounds first move the key into
//! its Fourier form (all three parties apply H), then encode the bit as an
//! entangled two-qubit codeword with a single controlled gate; the receivers
//! invert and jointly read the bit from the parity of their measurements.
//! Since the Fourier gate is not an involution for D > 2, the parties apply
//! the conjugate gate when returning to odd form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{
    ghz_state_labeled, hadamard_gate, pauli_x, ControlledGateSpec, Label, StateVector,
    SubsystemLayout,
};
use crate::runtime::{PartyId, QuantumChannel, RoundOperator, Session, SessionRng};

use super::{Protocol, ProtocolConfig, RoundKind, RoundOutcome};

fn key_a() -> Label {
    Label::new("a")
}

fn key_b() -> Label {
    Label::new("b")
}

fn key_c() -> Label {
    Label::new("c")
}

/// Codeword amplitudes over two qubits: |0bar> = (|00> + |11>)/sqrt2,
/// |1bar> = (|01> + |10>)/sqrt2.
pub fn codeword_amplitudes(q: u32) -> Vec<Complex64> {
    let w = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if q == 0 {
        vec![w, zero, zero, w]
    } else {
        vec![zero, w, w, zero]
    }
}

/// Fourier form of the GHZ key: (1/D) sum over l1+l2+l3 = 0 mod D of
/// |l1, l2, l3>.
pub fn ghz_fourier_formula(d: usize) -> Result<StateVector> {
    let layout = SubsystemLayout::new(vec![d, d, d], vec![key_a(), key_b(), key_c()])?;
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    let w = Complex64::new(1.0 / d as f64, 0.0);
    for l1 in 0..d {
        for l2 in 0..d {
            for l3 in 0..d {
                if (l1 + l2 + l3) % d == 0 {
                    amps[layout.linear_index(&[l1, l2, l3])?] = w;
                }
            }
        }
    }
    StateVector::from_amplitudes(layout, amps)
}

/// Formula for the odd-round coded state: (1/sqrt D)[sum_{j even}
/// |j,j,j>|q,q> + sum_{j odd} |j,j,j>|q+1,q+1>].
pub fn bk_odd_encoded_formula(d: usize, q: u32) -> Result<StateVector> {
    let layout = SubsystemLayout::new(
        vec![d, d, d, 2, 2],
        vec![key_a(), key_b(), key_c(), Label::new("m1"), Label::new("m2")],
    )?;
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        let bit = (q as usize + j) % 2;
        amps[layout.linear_index(&[j, j, j, bit, bit])?] = w;
    }
    StateVector::from_amplitudes(layout, amps)
}

pub struct BkProtocol {
    config: ProtocolConfig,
}

impl BkProtocol {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        Ok(BkProtocol { config })
    }
}

impl Protocol for BkProtocol {
    fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    fn key_labels(&self) -> Vec<Label> {
        vec![key_a(), key_b(), key_c()]
    }

    fn init_session(&self, channel: QuantumChannel, rng: SessionRng) -> Result<Session> {
        let key = ghz_state_labeled(self.config.key_dim, key_a(), key_b(), key_c())?;
        Session::new(
            key,
            &[
                (key_a(), PartyId::Alice),
                (key_b(), PartyId::Bob),
                (key_c(), PartyId::Charlie),
            ],
            channel,
            rng,
        )
    }

    fn run_round(
        &mut self,
        session: &mut Session,
        symbol: u32,
        kind: RoundKind,
    ) -> Result<RoundOutcome> {
        if symbol > 1 {
            return Err(Error::Config(format!("symbol {symbol} out of range for a bit")));
        }
        session.round += 1;
        let round = session.round;
        let d = self.config.key_dim;
        let odd = round % 2 == 1;

        if round >= 2 {
            // Entering an even round moves the key to Fourier form; entering
            // an odd round undoes it with the conjugate gate.
            let conjugated = odd;
            let h = hadamard_gate(d, conjugated);
            session.apply_party_gate(PartyId::Alice, &h, &key_a())?;
            session.apply_party_gate(PartyId::Bob, &h, &key_b())?;
            session.apply_party_gate(PartyId::Charlie, &h, &key_c())?;
            session.notify_round_operator(&RoundOperator::FourierAll { dim: d, conjugated })?;
        } else {
            session.notify_round_operator(&RoundOperator::None)?;
        }

        let m1 = Label::new(format!("m{round}.1"));
        let m2 = Label::new(format!("m{round}.2"));
        let flip = ControlledGateSpec::PowerOfU(pauli_x());

        if odd {
            session.add_register_state(
                PartyId::Alice,
                &[m1.clone(), m2.clone()],
                &[2, 2],
                {
                    let mut amps = vec![Complex64::new(0.0, 0.0); 4];
                    amps[(symbol * 2 + symbol) as usize] = Complex64::new(1.0, 0.0);
                    amps
                },
            )?;
            session.apply_party_controlled(PartyId::Alice, &flip, &key_a(), &m1)?;
            session.apply_party_controlled(PartyId::Alice, &flip, &key_a(), &m2)?;
        } else {
            session.add_register_state(
                PartyId::Alice,
                &[m1.clone(), m2.clone()],
                &[2, 2],
                codeword_amplitudes(symbol),
            )?;
            session.apply_party_controlled(PartyId::Alice, &flip, &key_a(), &m1)?;
        }

        let d1 = session.send(&m1, PartyId::Alice, PartyId::Bob)?;
        let d2 = session.send(&m2, PartyId::Alice, PartyId::Charlie)?;

        session.apply_party_controlled(PartyId::Bob, &flip, &key_b(), &d1)?;
        session.apply_party_controlled(PartyId::Charlie, &flip, &key_c(), &d2)?;
        let v1 = session.measure_party(PartyId::Bob, &d1)?;
        let v2 = session.measure_party(PartyId::Charlie, &d2)?;
        session.remove_subsystem(&d1)?;
        session.remove_subsystem(&d2)?;

        let (bob_symbol, charlie_symbol) = if odd {
            (v1, v2)
        } else {
            // The receivers identify the even-round bit together from the
            // parity of their outcomes.
            let joint = v1 ^ v2;
            (joint, joint)
        };

        Ok(RoundOutcome {
            round,
            alice_symbol: symbol,
            bob_symbol,
            charlie_symbol: Some(charlie_symbol),
            round_kind: kind,
            detected: false,
        })
    }

    fn ideal_key_state(&self, completed_rounds: usize) -> Result<StateVector> {
        let d = self.config.key_dim;
        if completed_rounds == 0 || completed_rounds % 2 == 1 {
            ghz_state_labeled(d, key_a(), key_b(), key_c())
        } else {
            ghz_fourier_formula(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::PassiveInterceptor;
    use crate::protocols::{build_protocol, Family};
    use rand::{Rng, SeedableRng};

    fn passive(p: &dyn Protocol, seed: u64) -> Session {
        p.init_session(
            QuantumChannel::with_interceptor(Box::new(PassiveInterceptor::default())),
            SessionRng::seed_from_u64(seed),
        )
        .unwrap()
    }

    #[test]
    fn odd_coded_state_matches_formula() {
        let key = ghz_state_labeled(2, key_a(), key_b(), key_c()).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0] = Complex64::new(1.0, 0.0); // |00>
        let s = key
            .tensor(
                &StateVector::from_amplitudes(
                    SubsystemLayout::new(vec![2, 2], vec!["m1".into(), "m2".into()]).unwrap(),
                    amps,
                )
                .unwrap(),
            )
            .unwrap();
        let flip = ControlledGateSpec::PowerOfU(pauli_x());
        let coded = s
            .apply_controlled(&flip, &key_a(), &"m1".into())
            .unwrap()
            .apply_controlled(&flip, &key_a(), &"m2".into())
            .unwrap();
        let expected = bk_odd_encoded_formula(2, 0).unwrap();
        assert!((coded.fidelity(&expected).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn alternating_rounds_recover_bits_and_key() {
        for d in [2usize, 4, 8] {
            let family = if d == 2 { Family::Bk } else { Family::BkHd };
            let config = ProtocolConfig::new(family).with_key_dim(d);
            let mut p = build_protocol(&config).unwrap();
            let mut s = passive(p.as_ref(), 41);
            let mut sym = SessionRng::seed_from_u64(d as u64);
            for _ in 0..100 {
                let q = sym.gen_range(0..2u32);
                let out = p.run_round(&mut s, q, RoundKind::Message).unwrap();
                assert_eq!(out.bob_symbol, q);
                assert_eq!(out.charlie_symbol, Some(q));
                let fid = s.state.fidelity(&p.ideal_key_state(out.round).unwrap()).unwrap();
                assert!((fid - 1.0).abs() < 1e-10, "key drift at d={d}");
            }
        }
    }

    #[test]
    fn carrier_measurement_leaves_hd_key_entangled() {
        let formula = bk_odd_encoded_formula(4, 1).unwrap();
        let (_, collapsed) = formula.project_z(&"m1".into(), 1).unwrap();
        assert!(collapsed.partial_trace_rank(&[key_a()]).unwrap() >= 2);
    }
}
