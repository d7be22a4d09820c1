//! The interceptable quantum channel.
//!
//! Every send is delivered unchanged, delivered after interceptor
//! operations, or replaced by an interceptor-supplied substitute subsystem
//! of equal dimension. The interceptor may touch only in-flight carriers
//! plus subsystems it already holds.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{ControlledGateSpec, Gate, Label, StateVector, SubsystemLayout};

use super::board::PublicAnnouncement;
use super::custody::{CustodyLedger, Holder};
use super::session::{RoundOperator, SessionRng};
use super::PartyId;

#[derive(Debug, Clone, Serialize)]
pub struct TransitRecord {
    pub round: usize,
    pub subsystem: Label,
    pub from: PartyId,
    pub to: PartyId,
    /// Label actually delivered (differs from `subsystem` on substitution).
    pub delivered: Label,
}

/// Classical data an interceptor hands back at the end of a run.
#[derive(Debug, Clone, Default)]
pub struct InterceptorSummary {
    /// Eve's raw per-round symbols, before any correction.
    pub raw_symbols: BTreeMap<usize, u32>,
    /// Eve's final per-round symbol estimates after hypothesis resolution.
    pub inferred_symbols: BTreeMap<usize, u32>,
    /// Whether post-processing narrowed the hypothesis set to one case.
    pub resolved: bool,
    /// Set when post-processing eliminated every hypothesis (the strategy's
    /// model of the session does not hold).
    pub fault: Option<String>,
}

/// Sandboxed access handed to interceptors. All operations enforce the
/// custody rule: a subsystem may be touched only if Eve holds it or it is
/// the in-flight carrier of the current transit.
pub struct EveCtx<'a> {
    pub round: usize,
    pub carrier: Option<Label>,
    pub from: PartyId,
    pub to: PartyId,
    pub(crate) state: &'a mut StateVector,
    pub(crate) ledger: &'a mut CustodyLedger,
    pub(crate) rng: &'a mut SessionRng,
}

impl EveCtx<'_> {
    fn check_access(&self, label: &Label) -> Result<()> {
        if self.carrier.as_ref() == Some(label) {
            return Ok(());
        }
        match self.ledger.holder_of(label)? {
            Holder::Party(PartyId::Eve) => Ok(()),
            holder => Err(Error::Custody(format!(
                "interceptor may not touch `{label}` (held by {holder:?})"
            ))),
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate, label: &Label) -> Result<()> {
        self.check_access(label)?;
        *self.state = self.state.apply_single(gate, label)?;
        Ok(())
    }

    pub fn apply_controlled(
        &mut self,
        spec: &ControlledGateSpec,
        control: &Label,
        target: &Label,
    ) -> Result<()> {
        self.check_access(control)?;
        self.check_access(target)?;
        *self.state = self.state.apply_controlled(spec, control, target)?;
        Ok(())
    }

    /// z-basis measurement of an accessible subsystem; the subsystem stays in
    /// the register, collapsed.
    pub fn measure(&mut self, label: &Label) -> Result<u32> {
        self.check_access(label)?;
        let (rec, post) = self.state.measure_z(label, self.rng)?;
        *self.state = post;
        Ok(rec.outcome as u32)
    }

    /// Appends a fresh Eve-held subsystem in a basis state.
    pub fn add_ancilla(&mut self, label: Label, dim: usize, index: usize) -> Result<()> {
        *self.state = self.state.extend_with_basis(label.clone(), dim, index)?;
        self.ledger.assign(label, Holder::Party(PartyId::Eve));
        Ok(())
    }

    /// Appends a fresh Eve-held register prepared in an arbitrary pure state.
    pub fn add_ancilla_state(
        &mut self,
        labels: &[Label],
        dims: &[usize],
        amps: Vec<Complex64>,
    ) -> Result<()> {
        let layout = SubsystemLayout::new(dims.to_vec(), labels.to_vec())?;
        let fresh = StateVector::from_amplitudes(layout, amps)?;
        *self.state = self.state.tensor(&fresh)?;
        for l in labels {
            self.ledger.assign(l.clone(), Holder::Party(PartyId::Eve));
        }
        Ok(())
    }

    /// Takes custody of the in-flight carrier. The interceptor must then
    /// deliver a substitute of equal dimension.
    pub fn capture_carrier(&mut self) -> Result<Label> {
        let carrier = self
            .carrier
            .clone()
            .ok_or_else(|| Error::Custody("no carrier in transit".into()))?;
        self.ledger.assign(carrier.clone(), Holder::Party(PartyId::Eve));
        Ok(carrier)
    }

    /// Drops a measured Eve-held subsystem from the register to keep the
    /// simulated dimension small.
    pub fn discard(&mut self, label: &Label) -> Result<()> {
        self.check_access(label)?;
        *self.state = self.state.remove_subsystem(label)?;
        self.ledger.remove(label);
        Ok(())
    }

    pub fn dim_of(&self, label: &Label) -> Result<usize> {
        self.state.layout().dim_of(label)
    }
}

/// An attack strategy attached to the quantum channel.
pub trait Interceptor {
    /// Called after the legitimate parties apply their per-round key
    /// operator, so the strategy can mirror it on retained subsystems.
    fn on_round_start(
        &mut self,
        _round: usize,
        _op: &RoundOperator,
        _ctx: &mut EveCtx,
    ) -> Result<()> {
        Ok(())
    }

    /// Called while `ctx.carrier` is in transit. Returns the label to
    /// deliver: the carrier itself, or an Eve-held substitute of equal
    /// dimension (after `capture_carrier`).
    fn on_transit(&mut self, ctx: &mut EveCtx) -> Result<Label>;

    /// Called for every board append, immediately.
    fn on_announcement(&mut self, _ann: &PublicAnnouncement) {}

    fn finish(&mut self) -> InterceptorSummary {
        InterceptorSummary::default()
    }
}

/// Channel with an optional interceptor. `None` means no hooks at all.
pub struct QuantumChannel {
    pub(crate) interceptor: Option<Box<dyn Interceptor>>,
    pub transit_log: Vec<TransitRecord>,
}

impl QuantumChannel {
    pub fn with_interceptor(interceptor: Box<dyn Interceptor>) -> Self {
        QuantumChannel {
            interceptor: Some(interceptor),
            transit_log: Vec::new(),
        }
    }

    /// A channel without hooks; sends are delivered directly.
    pub fn unhooked() -> Self {
        QuantumChannel {
            interceptor: None,
            transit_log: Vec::new(),
        }
    }
}
