//! A protocol session: one shared entangled key, its custody ledger, the
//! channel, the public board and the per-round transcript. A session is one
//! logical thread of execution; distinct sessions are independent.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qcore::{ControlledGateSpec, Gate, Label, StateVector};

use super::board::{Payload, PublicAnnouncement, PublicBoard};
use super::channel::{EveCtx, QuantumChannel, TransitRecord};
use super::custody::{CustodyLedger, Holder};
use super::transcript::RoundRecord;
use super::PartyId;

pub type SessionRng = ChaCha8Rng;

/// The bilateral key operator the parties apply at the start of a round.
/// Public knowledge: the interceptor is told which operator ran.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundOperator {
    /// Both parties rotate their key qubit by `theta`.
    BilateralRotation { theta: f64 },
    /// Fourier pair on a Bell key: one side applies H, the other H*.
    /// `alice_conjugated` tells which side got the conjugate.
    FourierPair { dim: usize, alice_conjugated: bool },
    /// All parties of a GHZ key apply the same Fourier gate.
    FourierAll { dim: usize, conjugated: bool },
    /// No key operator this round.
    None,
}

pub struct Session {
    pub state: StateVector,
    pub ledger: CustodyLedger,
    pub board: PublicBoard,
    pub channel: QuantumChannel,
    pub rng: SessionRng,
    pub round: usize,
    pub records: Vec<RoundRecord>,
}

impl Session {
    pub fn new(
        key_state: StateVector,
        holders: &[(Label, PartyId)],
        channel: QuantumChannel,
        rng: SessionRng,
    ) -> Result<Self> {
        let mut ledger = CustodyLedger::new();
        for (label, party) in holders {
            if !key_state.layout().contains(label) {
                return Err(Error::UnknownLabel(label.to_string()));
            }
            ledger.assign(label.clone(), Holder::Party(*party));
        }
        Ok(Session {
            state: key_state,
            ledger,
            board: PublicBoard::new(),
            channel,
            rng,
            round: 0,
            records: Vec::new(),
        })
    }

    /// A party applies a single-subsystem gate to a subsystem it holds.
    pub fn apply_party_gate(&mut self, party: PartyId, gate: &Gate, label: &Label) -> Result<()> {
        self.ledger.assert_custody(party, &[label])?;
        self.state = self.state.apply_single(gate, label)?;
        Ok(())
    }

    /// A party applies a controlled gate; it must hold both subsystems.
    pub fn apply_party_controlled(
        &mut self,
        party: PartyId,
        spec: &ControlledGateSpec,
        control: &Label,
        target: &Label,
    ) -> Result<()> {
        self.ledger.assert_custody(party, &[control, target])?;
        self.state = self.state.apply_controlled(spec, control, target)?;
        Ok(())
    }

    /// A party measures a held subsystem in the z basis.
    pub fn measure_party(&mut self, party: PartyId, label: &Label) -> Result<u32> {
        self.ledger.assert_custody(party, &[label])?;
        let (rec, post) = self.state.measure_z(label, &mut self.rng)?;
        self.state = post;
        Ok(rec.outcome as u32)
    }

    /// A party measures a held subsystem in the orthonormal basis given by
    /// the columns of `basis`.
    pub fn measure_party_in_basis(
        &mut self,
        party: PartyId,
        label: &Label,
        basis: &Gate,
    ) -> Result<u32> {
        self.ledger.assert_custody(party, &[label])?;
        let (rec, post) = self.state.measure_in_basis(label, basis, &mut self.rng)?;
        self.state = post;
        Ok(rec.outcome as u32)
    }

    /// A party introduces a fresh subsystem it holds (carrier preparation).
    pub fn add_subsystem_state(
        &mut self,
        party: PartyId,
        label: Label,
        amps: Vec<num_complex::Complex64>,
    ) -> Result<()> {
        self.state = self.state.extend_with_state(label.clone(), amps)?;
        self.ledger.assign(label, Holder::Party(party));
        Ok(())
    }

    /// A party introduces a fresh multi-subsystem register it holds.
    pub fn add_register_state(
        &mut self,
        party: PartyId,
        labels: &[Label],
        dims: &[usize],
        amps: Vec<num_complex::Complex64>,
    ) -> Result<()> {
        let layout = crate::qcore::SubsystemLayout::new(dims.to_vec(), labels.to_vec())?;
        let fresh = StateVector::from_amplitudes(layout, amps)?;
        self.state = self.state.tensor(&fresh)?;
        for l in labels {
            self.ledger.assign(l.clone(), Holder::Party(party));
        }
        Ok(())
    }

    /// Drops a measured subsystem from the register.
    pub fn remove_subsystem(&mut self, label: &Label) -> Result<()> {
        self.state = self.state.remove_subsystem(label)?;
        self.ledger.remove(label);
        Ok(())
    }

    /// Notifies the interceptor of the round's key operator so it can mirror
    /// it on retained subsystems (the parties have already applied theirs).
    pub fn notify_round_operator(&mut self, op: &RoundOperator) -> Result<()> {
        if let Some(mut interceptor) = self.channel.interceptor.take() {
            let mut ctx = EveCtx {
                round: self.round,
                carrier: None,
                from: PartyId::Alice,
                to: PartyId::Bob,
                state: &mut self.state,
                ledger: &mut self.ledger,
                rng: &mut self.rng,
            };
            let result = interceptor.on_round_start(self.round, op, &mut ctx);
            self.channel.interceptor = Some(interceptor);
            result?;
        }
        Ok(())
    }

    /// Sends `subsystem` from one party to another through the channel.
    /// Custody becomes in-transit, the interceptor callback runs (it may
    /// apply gates, measure, store, or substitute), then custody of the
    /// delivered subsystem transfers to the receiver. Returns the delivered
    /// label.
    pub fn send(&mut self, subsystem: &Label, from: PartyId, to: PartyId) -> Result<Label> {
        self.ledger.assert_custody(from, &[subsystem])?;
        self.ledger.set_in_transit(subsystem)?;
        let carrier_dim = self.state.layout().dim_of(subsystem)?;
        let delivered = if let Some(mut interceptor) = self.channel.interceptor.take() {
            let mut ctx = EveCtx {
                round: self.round,
                carrier: Some(subsystem.clone()),
                from,
                to,
                state: &mut self.state,
                ledger: &mut self.ledger,
                rng: &mut self.rng,
            };
            let out = interceptor.on_transit(&mut ctx);
            self.channel.interceptor = Some(interceptor);
            out?
        } else {
            subsystem.clone()
        };
        // The delivered subsystem must be the original carrier (still in
        // transit) or an interceptor-held substitute of equal dimension.
        match self.ledger.holder_of(&delivered)? {
            Holder::InTransit => {}
            Holder::Party(PartyId::Eve) if delivered != *subsystem => {}
            holder => {
                return Err(Error::Custody(format!(
                    "delivered subsystem `{delivered}` has invalid holder {holder:?}"
                )));
            }
        }
        if self.state.layout().dim_of(&delivered)? != carrier_dim {
            return Err(Error::Custody(format!(
                "substitute `{delivered}` does not match the carrier dimension {carrier_dim}"
            )));
        }
        self.ledger.assign(delivered.clone(), Holder::Party(to));
        self.channel.transit_log.push(TransitRecord {
            round: self.round,
            subsystem: subsystem.clone(),
            from,
            to,
            delivered: delivered.clone(),
        });
        Ok(delivered)
    }

    /// Appends to the public board; immediately visible to the interceptor.
    pub fn announce(&mut self, announcer: PartyId, payload: Payload) {
        let ann = PublicAnnouncement {
            round: self.round,
            announcer,
            payload,
        };
        self.board.push(ann.clone());
        if let Some(interceptor) = self.channel.interceptor.as_mut() {
            interceptor.on_announcement(&ann);
        }
    }

    pub fn record_round(&mut self, record: RoundRecord) {
        self.records.push(record);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{bell_state_labeled, rotation_gate};
    use rand::SeedableRng;

    fn session() -> Session {
        let key = bell_state_labeled(2, "A".into(), "B".into()).unwrap();
        Session::new(
            key,
            &[("A".into(), PartyId::Alice), ("B".into(), PartyId::Bob)],
            QuantumChannel::unhooked(),
            SessionRng::seed_from_u64(1),
        )
        .unwrap()
    }

    #[test]
    fn party_gate_requires_custody() {
        let mut s = session();
        let r = rotation_gate(0.3);
        assert!(s.apply_party_gate(PartyId::Alice, &r, &"A".into()).is_ok());
        assert!(matches!(
            s.apply_party_gate(PartyId::Alice, &r, &"B".into()),
            Err(Error::Custody(_))
        ));
    }

    #[test]
    fn unhooked_send_transfers_custody() {
        let mut s = session();
        s.add_subsystem_state(
            PartyId::Alice,
            "g".into(),
            vec![num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let delivered = s.send(&"g".into(), PartyId::Alice, PartyId::Bob).unwrap();
        assert_eq!(delivered, "g".into());
        assert_eq!(
            s.ledger.holder_of(&"g".into()).unwrap(),
            Holder::Party(PartyId::Bob)
        );
        assert_eq!(s.channel.transit_log.len(), 1);
    }

    #[test]
    fn sender_must_hold_carrier() {
        let mut s = session();
        assert!(matches!(
            s.send(&"B".into(), PartyId::Alice, PartyId::Bob),
            Err(Error::Custody(_))
        ));
    }
}
