//! Classical-communication check variants of the Bell-key protocol.
//!
//! Variant A: on a check-ii round Alice applies an extra key rotation before
//! encoding and announces it after the carrier arrives; Bob compensates on
//! his side before decoding.
//!
//! Variant B: on a check-ii round Alice sends the bare carrier with no
//! encoding and announces that; Bob measures it directly.
//!
//! Check results are compared on the board only after the full run.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{rotation_gate, ControlledGateSpec, Gate, Label, StateVector};
use crate::runtime::{NoticeKind, PartyId, Payload, QuantumChannel, RoundOperator, Session, SessionRng};

use super::zlg::{ideal_bell_key, key_label_a, key_label_b};
use super::{CheckComparison, Family, Protocol, ProtocolConfig, RoundKind, RoundOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Message,
    CheckI,
    CheckII,
}

pub struct ZlgCheckProtocol {
    config: ProtocolConfig,
    rotation: Gate,
    variant_a: bool,
    /// Pre-drawn mode schedule when exact counts are requested.
    schedule: Vec<Mode>,
}

impl ZlgCheckProtocol {
    pub fn new(config: ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let variant_a = config.family == Family::ZlgCheckA;
        Ok(ZlgCheckProtocol {
            rotation: rotation_gate(config.theta),
            config,
            variant_a,
            schedule: Vec::new(),
        })
    }

    fn draw_mode(&mut self, session: &mut Session) -> Mode {
        if let Some(m) = self.schedule.pop() {
            return m;
        }
        // Alice's private coin: one third each.
        use rand::Rng;
        match session.rng.gen_range(0..3u32) {
            0 => Mode::Message,
            1 => Mode::CheckI,
            _ => Mode::CheckII,
        }
    }
}

impl Protocol for ZlgCheckProtocol {
    fn config(&self) -> &ProtocolConfig {
        &self.config
    }

    fn key_labels(&self) -> Vec<Label> {
        vec![key_label_a(), key_label_b()]
    }

    fn init_session(&self, channel: QuantumChannel, rng: SessionRng) -> Result<Session> {
        Session::new(
            ideal_bell_key(2)?,
            &[
                (key_label_a(), PartyId::Alice),
                (key_label_b(), PartyId::Bob),
            ],
            channel,
            rng,
        )
    }

    fn begin_trial(&mut self, session: &mut Session, total_rounds: usize) -> Result<()> {
        self.schedule.clear();
        if self.config.exact_mode_counts {
            if total_rounds % 3 != 0 {
                return Err(Error::Config(format!(
                    "rounds: exact mode counts require a multiple of 3, got {total_rounds}"
                )));
            }
            let n = total_rounds / 3;
            let mut modes = Vec::with_capacity(total_rounds);
            modes.extend(std::iter::repeat(Mode::Message).take(n));
            modes.extend(std::iter::repeat(Mode::CheckI).take(n));
            modes.extend(std::iter::repeat(Mode::CheckII).take(n));
            // Fisher-Yates with the session stream keeps trials reproducible.
            use rand::Rng;
            for i in (1..modes.len()).rev() {
                let j = session.rng.gen_range(0..=i);
                modes.swap(i, j);
            }
            modes.reverse(); // popped from the back
            self.schedule = modes;
        }
        Ok(())
    }

    fn run_round(
        &mut self,
        session: &mut Session,
        symbol: u32,
        _kind: RoundKind,
    ) -> Result<RoundOutcome> {
        if symbol > 1 {
            return Err(Error::Config(format!("symbol {symbol} out of range for a bit")));
        }
        let mode = self.draw_mode(session);
        session.round += 1;
        let round = session.round;
        let (a, b) = (key_label_a(), key_label_b());

        session.apply_party_gate(PartyId::Alice, &self.rotation, &a)?;
        session.apply_party_gate(PartyId::Bob, &self.rotation, &b)?;
        session.notify_round_operator(&RoundOperator::BilateralRotation {
            theta: self.config.theta,
        })?;

        let carrier = Label::new(format!("c{round}"));
        let mut amps = vec![Complex64::new(0.0, 0.0); 2];
        amps[symbol as usize] = Complex64::new(1.0, 0.0);
        session.add_subsystem_state(PartyId::Alice, carrier.clone(), amps)?;

        let bob_symbol = match (self.variant_a, mode) {
            (true, Mode::CheckII) => {
                // Extra rotation on Alice's key half, announced only after
                // the carrier has crossed the channel.
                session.apply_party_gate(PartyId::Alice, &self.rotation, &a)?;
                session.apply_party_controlled(
                    PartyId::Alice,
                    &ControlledGateSpec::RightShift,
                    &a,
                    &carrier,
                )?;
                let delivered = session.send(&carrier, PartyId::Alice, PartyId::Bob)?;
                session.announce(
                    PartyId::Alice,
                    Payload::Notice {
                        notice: NoticeKind::CompensateRotation,
                    },
                );
                session.apply_party_gate(PartyId::Bob, &self.rotation, &b)?;
                session.apply_party_controlled(
                    PartyId::Bob,
                    &ControlledGateSpec::RightShift,
                    &b,
                    &delivered,
                )?;
                let v = session.measure_party(PartyId::Bob, &delivered)?;
                session.remove_subsystem(&delivered)?;
                v
            }
            (false, Mode::CheckII) => {
                // Bare carrier, no encoding on either side.
                let delivered = session.send(&carrier, PartyId::Alice, PartyId::Bob)?;
                session.announce(
                    PartyId::Alice,
                    Payload::Notice {
                        notice: NoticeKind::NoOperation,
                    },
                );
                let v = session.measure_party(PartyId::Bob, &delivered)?;
                session.remove_subsystem(&delivered)?;
                v
            }
            _ => {
                session.apply_party_controlled(
                    PartyId::Alice,
                    &ControlledGateSpec::RightShift,
                    &a,
                    &carrier,
                )?;
                let delivered = session.send(&carrier, PartyId::Alice, PartyId::Bob)?;
                session.apply_party_controlled(
                    PartyId::Bob,
                    &ControlledGateSpec::RightShift,
                    &b,
                    &delivered,
                )?;
                let v = session.measure_party(PartyId::Bob, &delivered)?;
                session.remove_subsystem(&delivered)?;
                v
            }
        };

        Ok(RoundOutcome {
            round,
            alice_symbol: symbol,
            bob_symbol,
            charlie_symbol: None,
            round_kind: if mode == Mode::Message {
                RoundKind::Message
            } else {
                RoundKind::Check
            },
            detected: false,
        })
    }

    fn ideal_key_state(&self, _completed_rounds: usize) -> Result<StateVector> {
        ideal_bell_key(2)
    }

    fn check_comparison(&self) -> CheckComparison {
        CheckComparison::Batched
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::PassiveInterceptor;
    use crate::protocols::build_protocol;
    use rand::{Rng, SeedableRng};

    fn run_many(family: Family, exact: bool) {
        let mut config = ProtocolConfig::new(family);
        config.exact_mode_counts = exact;
        let mut p = build_protocol(&config).unwrap();
        let mut s = p
            .init_session(
                QuantumChannel::with_interceptor(Box::new(PassiveInterceptor::default())),
                SessionRng::seed_from_u64(21),
            )
            .unwrap();
        let total = 99;
        p.begin_trial(&mut s, total).unwrap();
        let mut sym = SessionRng::seed_from_u64(5);
        let mut checks = 0;
        for _ in 0..total {
            let q = sym.gen_range(0..2u32);
            let out = p.run_round(&mut s, q, RoundKind::Message).unwrap();
            assert_eq!(out.bob_symbol, q, "passive receiver mismatch");
            if out.round_kind == RoundKind::Check {
                checks += 1;
            }
            let fid = s.state.fidelity(&p.ideal_key_state(out.round).unwrap()).unwrap();
            assert!((fid - 1.0).abs() < 1e-10);
        }
        if exact {
            assert_eq!(checks, 66); // 2N of 3N rounds are checks
        } else {
            assert!(checks > 0);
        }
    }

    #[test]
    fn variant_a_passive_rounds_correct() {
        run_many(Family::ZlgCheckA, false);
        run_many(Family::ZlgCheckA, true);
    }

    #[test]
    fn variant_b_passive_rounds_correct() {
        run_many(Family::ZlgCheckB, false);
        run_many(Family::ZlgCheckB, true);
    }

    #[test]
    fn board_only_carries_notices_during_rounds() {
        // Message symbols are never announced by the protocol itself.
        let config = ProtocolConfig::new(Family::ZlgCheckB);
        let mut p = build_protocol(&config).unwrap();
        let mut s = p
            .init_session(
                QuantumChannel::with_interceptor(Box::new(PassiveInterceptor::default())),
                SessionRng::seed_from_u64(3),
            )
            .unwrap();
        p.begin_trial(&mut s, 30).unwrap();
        for _ in 0..30 {
            p.run_round(&mut s, 1, RoundKind::Message).unwrap();
        }
        assert!(s
            .board
            .entries()
            .iter()
            .all(|e| matches!(e.payload, Payload::Notice { .. })));
    }
}
