//! Pair-conversion attack on the two-party Bell-key protocol.
//!
//! Round one: measure the carrier in z and forward it (undetectable; the
//! shared key collapses to a product state). Round two: keep the carrier —
//! it is now Bell-paired with Alice's key half — and deliver one half of a
//! fresh Bell pair, whose other half becomes paired with Bob's key half
//! after his decode measurement. From round three on Eve is a relay: she
//! co-applies the parties' key operator to her two particles, decodes each
//! incoming carrier with the Alice-side particle, and re-encodes the
//! measured value onto the Bob-side particle. With probability one half the
//! two pairs come out in the same Bell state and the relay is exact.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Result;
use crate::qcore::{hadamard_gate, rotation_gate, ControlledGateSpec, Label};
use crate::runtime::{
    EveCtx, Interceptor, InterceptorSummary, PartyId, Payload, PublicAnnouncement, RoundOperator,
};

use super::hypotheses::{AttackState, PairConversionModel};

fn bell_pair_amps(d: usize) -> Vec<Complex64> {
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        amps[j * d + j] = w;
    }
    amps
}

pub struct FAttackZlg {
    theta: f64,
    state: AttackState,
    /// Captured round-two carrier: Eve's half of the pair shared with Alice.
    alice_side: Option<Label>,
    /// Eve's half of the substituted pair shared with Bob.
    bob_side: Option<Label>,
    last_round: usize,
}

impl FAttackZlg {
    pub fn new(theta: f64) -> Self {
        FAttackZlg {
            theta,
            state: AttackState::new(PairConversionModel::Zlg),
            alice_side: None,
            bob_side: None,
            last_round: 0,
        }
    }

    fn held(&self) -> Vec<Label> {
        self.alice_side
            .iter()
            .chain(self.bob_side.iter())
            .cloned()
            .collect()
    }
}

impl Interceptor for FAttackZlg {
    fn on_round_start(
        &mut self,
        _round: usize,
        op: &RoundOperator,
        ctx: &mut EveCtx,
    ) -> Result<()> {
        // Sync rule: mirror the parties' key operator on both retained
        // particles. Without this the retained pairs drift out of the
        // rotating frame and the relay decodes noise.
        for label in self.held() {
            match op {
                RoundOperator::BilateralRotation { theta } => {
                    ctx.apply_gate(&rotation_gate(*theta), &label)?;
                }
                RoundOperator::FourierPair { .. } | RoundOperator::FourierAll { .. } => {
                    let dim = ctx.dim_of(&label)?;
                    ctx.apply_gate(&hadamard_gate(dim, false), &label)?;
                }
                RoundOperator::None => {}
            }
        }
        Ok(())
    }

    fn on_transit(&mut self, ctx: &mut EveCtx) -> Result<Label> {
        let carrier = ctx.carrier.clone().expect("transit carries a subsystem");
        self.last_round = self.last_round.max(ctx.round);
        match ctx.round {
            1 => {
                let v = ctx.measure(&carrier)?;
                self.state.raw_symbols.insert(1, v);
                Ok(carrier)
            }
            2 => {
                let kept = ctx.capture_carrier()?;
                let dim = ctx.dim_of(&kept)?;
                let mine = Label::new("e1");
                let substitute = Label::new("e2");
                ctx.add_ancilla_state(
                    &[mine.clone(), substitute.clone()],
                    &[dim, dim],
                    bell_pair_amps(dim),
                )?;
                self.alice_side = Some(kept.clone());
                self.bob_side = Some(mine.clone());
                self.state.held = vec![kept, mine];
                Ok(substitute)
            }
            n => {
                let decode_key = self.alice_side.clone().expect("pair established");
                let encode_key = self.bob_side.clone().expect("pair established");
                ctx.apply_controlled(&ControlledGateSpec::RightShift, &decode_key, &carrier)?;
                let raw = ctx.measure(&carrier)?;
                self.state.raw_symbols.insert(n, raw);
                ctx.apply_controlled(&ControlledGateSpec::RightShift, &encode_key, &carrier)?;
                Ok(carrier)
            }
        }
    }

    fn on_announcement(&mut self, ann: &PublicAnnouncement) {
        if ann.announcer != PartyId::Alice {
            return;
        }
        if let Payload::CheckValue { position, value } = ann.payload {
            // A contradiction marks the model as wrong for this session
            // (e.g. when run against the repaired protocol); the fault flag
            // is reported, not escalated.
            let _ = self.state.absorb(position, value);
        }
    }

    fn finish(&mut self) -> InterceptorSummary {
        let inferred: BTreeMap<usize, u32> = self.state.inferred_symbols(self.last_round);
        InterceptorSummary {
            raw_symbols: self.state.raw_symbols.clone(),
            inferred_symbols: inferred,
            resolved: self.state.resolved().is_some(),
            fault: self.state.fault.clone(),
        }
    }
}
