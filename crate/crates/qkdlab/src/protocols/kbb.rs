//! The d-level Bell-key protocol and its sectioned higher-dimensional
//! repair.
//!
//! Plain form: the shared pair lives in dimension d, carriers are d-level,
//! encoding is the controlled right shift and decoding the controlled left
//! shift. Each round both sides apply the Fourier pair (H on Alice's half,
//! H* on Bob's), which fixes the clean key.
//!
//! Repair: the key dimension D = k*d is split into k residue classes; the
//! carrier lives in dimension k and is shifted by the key value mod k, so a
//! carrier measurement only collapses the key onto a residue class, which
//! stays entangled.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{
    hadamard_gate, shift_gate, ControlledGateSpec, Label, StateVector, SubsystemLayout,
};
use crate::runtime::{PartyId, QuantumChannel, RoundOperator, Session, SessionRng};

use super::{Family, Protocol, ProtocolConfig, RoundKind, RoundOutcome};

fn key_label_a() -> Label {
    Label::new("a")
}

fn key_label_b() -> Label {
    Label::new("b")
}

pub struct KbbProtocol {
    config: ProtocolConfig,
    sectioned: bool,
}

impl KbbProtocol {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let sectioned = config.family == Family::KbbHd;
        Ok(KbbProtocol { config, sectioned })
    }

    fn encode_spec(&self) -> ControlledGateSpec {
        if self.sectioned {
            // Shift amount is the key value reduced mod k.
            ControlledGateSpec::PowerOfU(shift_gate(self.config.carrier_dim))
        } else {
            ControlledGateSpec::RightShift
        }
    }

    fn decode_spec(&self) -> ControlledGateSpec {
        if self.sectioned {
            ControlledGateSpec::PowerOfU(shift_gate(self.config.carrier_dim).dagger())
        } else {
            ControlledGateSpec::LeftShift
        }
    }
}

impl Protocol for KbbProtocol {
    fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    fn key_labels(&self) -> Vec<Label> {
        vec![key_label_a(), key_label_b()]
    }

    fn init_session(&self, channel: QuantumChannel, rng: SessionRng) -> Result<Session> {
        let key = crate::qcore::bell_state_labeled(self.config.key_dim, key_label_a(), key_label_b())?;
        Session::new(
            key,
            &[
                (key_label_a(), PartyId::Alice),
                (key_label_b(), PartyId::Bob),
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
        let carrier_dim = self.config.carrier_dim;
        if symbol as usize >= carrier_dim {
            return Err(Error::Config(format!(
                "symbol {symbol} out of range for carrier dimension {carrier_dim}"
            )));
        }
        session.round += 1;
        let round = session.round;
        let d = self.config.key_dim;
        let (a, b) = (key_label_a(), key_label_b());

        // Plain form applies the same Fourier pair every round; the repair
        // alternates sides round to round (the gate is not an involution).
        let alice_conjugated = self.sectioned && round % 2 == 0;
        session.apply_party_gate(PartyId::Alice, &hadamard_gate(d, alice_conjugated), &a)?;
        session.apply_party_gate(PartyId::Bob, &hadamard_gate(d, !alice_conjugated), &b)?;
        session.notify_round_operator(&RoundOperator::FourierPair {
            dim: d,
            alice_conjugated,
        })?;

        let carrier = Label::new(format!("c{round}"));
        let mut amps = vec![Complex64::new(0.0, 0.0); carrier_dim];
        amps[symbol as usize] = Complex64::new(1.0, 0.0);
        session.add_subsystem_state(PartyId::Alice, carrier.clone(), amps)?;
        session.apply_party_controlled(PartyId::Alice, &self.encode_spec(), &a, &carrier)?;

        let delivered = session.send(&carrier, PartyId::Alice, PartyId::Bob)?;

        session.apply_party_controlled(PartyId::Bob, &self.decode_spec(), &b, &delivered)?;
        let bob_symbol = session.measure_party(PartyId::Bob, &delivered)?;
        session.remove_subsystem(&delivered)?;

        Ok(RoundOutcome {
            round,
            alice_symbol: symbol,
            bob_symbol,
            charlie_symbol: None,
            round_kind: kind,
            detected: false,
        })
    }

    fn ideal_key_state(&self, _completed_rounds: usize) -> Result<StateVector> {
        crate::qcore::bell_state_labeled(self.config.key_dim, key_label_a(), key_label_b())
    }
}

/// Formula state for the encode stage of the plain protocol:
/// (1/sqrt d) sum_j |j, j, q + j mod d> over (a, b, carrier).
pub fn kbb_encoded_formula(d: usize, symbol: u32) -> Result<StateVector> {
    let layout = SubsystemLayout::new(
        vec![d, d, d],
        vec![key_label_a(), key_label_b(), Label::new("c")],
    )?;
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        amps[layout.linear_index(&[j, j, (symbol as usize + j) % d])?] = w;
    }
    StateVector::from_amplitudes(layout, amps)
}

/// Formula state for the encode stage of the sectioned repair:
/// (1/sqrt D) sum_j |j, j, q + (j mod k) mod k> over (a, b, carrier).
pub fn kbb_hd_encoded_formula(key_dim: usize, k: usize, symbol: u32) -> Result<StateVector> {
    let layout = SubsystemLayout::new(
        vec![key_dim, key_dim, k],
        vec![key_label_a(), key_label_b(), Label::new("c")],
    )?;
    let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
    let w = Complex64::new(1.0 / (key_dim as f64).sqrt(), 0.0);
    for j in 0..key_dim {
        amps[layout.linear_index(&[j, j, (symbol as usize + j) % k])?] = w;
    }
    StateVector::from_amplitudes(layout, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::PassiveInterceptor;
    use crate::protocols::build_protocol;
    use rand::{Rng, SeedableRng};

    fn passive(p: &dyn Protocol, seed: u64) -> Session {
        p.init_session(
            QuantumChannel::with_interceptor(Box::new(PassiveInterceptor::default())),
            SessionRng::seed_from_u64(seed),
        )
        .unwrap()
    }

    #[test]
    fn plain_rounds_decode_for_d_up_to_five() {
        for d in [2usize, 3, 5] {
            let config = ProtocolConfig::new(Family::Kbb).with_key_dim(d);
            let mut p = build_protocol(&config).unwrap();
            let mut s = passive(p.as_ref(), 31);
            let mut sym = SessionRng::seed_from_u64(d as u64);
            for _ in 0..50 {
                let q = sym.gen_range(0..d as u32);
                let out = p.run_round(&mut s, q, RoundKind::Message).unwrap();
                assert_eq!(out.bob_symbol, q);
                let fid = s.state.fidelity(&p.ideal_key_state(out.round).unwrap()).unwrap();
                assert!((fid - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn encode_stage_matches_formula_d3() {
        let key = crate::qcore::bell_state_labeled(3, key_label_a(), key_label_b()).unwrap();
        let mut amps = vec![Complex64::new(0.0, 0.0); 3];
        amps[1] = Complex64::new(1.0, 0.0);
        let s = key.extend_with_state("c".into(), amps).unwrap();
        let encoded = s
            .apply_controlled(&ControlledGateSpec::RightShift, &key_label_a(), &"c".into())
            .unwrap();
        let expected = kbb_encoded_formula(3, 1).unwrap();
        assert!((encoded.fidelity(&expected).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sectioned_rounds_decode() {
        for (key_dim, k) in [(4usize, 2usize), (6, 2), (6, 3)] {
            let config = ProtocolConfig::new(Family::KbbHd)
                .with_key_dim(key_dim)
                .with_carrier_dim(k);
            let mut p = build_protocol(&config).unwrap();
            let mut s = passive(p.as_ref(), 33);
            let mut sym = SessionRng::seed_from_u64(key_dim as u64);
            for _ in 0..40 {
                let q = sym.gen_range(0..k as u32);
                let out = p.run_round(&mut s, q, RoundKind::Message).unwrap();
                assert_eq!(out.bob_symbol, q);
                let fid = s.state.fidelity(&p.ideal_key_state(out.round).unwrap()).unwrap();
                assert!((fid - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sectioned_carrier_measurement_leaves_rank_d() {
        let (key_dim, k) = (4usize, 2usize);
        let formula = kbb_hd_encoded_formula(key_dim, k, 1).unwrap();
        let (_, collapsed) = formula.project_z(&"c".into(), 1).unwrap();
        // Key collapses onto one residue class of size d = D / k.
        assert_eq!(
            collapsed.partial_trace_rank(&[key_label_a()]).unwrap(),
            key_dim / k
        );
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = ProtocolConfig::new(Family::KbbHd).with_key_dim(5).with_carrier_dim(2);
        assert!(bad.validate().is_err());
        let bad = ProtocolConfig::new(Family::Kbb).with_key_dim(1);
        assert!(bad.validate().is_err());
    }
}
