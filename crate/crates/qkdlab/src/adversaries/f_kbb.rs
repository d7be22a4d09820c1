//! Pair-conversion attack on the d-level protocol.
//!
//! Same architecture as the qubit attack with d-outcome measurements and a
//! generalized substituted pair. Bob's decode measurement of the substitute
//! matches Alice's round-two symbol with probability 1/d; in that branch
//! Eve's two generalized Bell pairs carry equal shifts forever and her relay
//! is exact. Sync rule: the Alice-side particle mirrors the receiver's
//! Fourier gate, the Bob-side particle mirrors the sender's.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Result;
use crate::qcore::{hadamard_gate, ControlledGateSpec, Label};
use crate::runtime::{
    EveCtx, Interceptor, InterceptorSummary, PartyId, Payload, PublicAnnouncement, RoundOperator,
};

use super::hypotheses::{AttackState, PairConversionModel};

pub struct FAttackKbb {
    state: AttackState,
    alice_side: Option<Label>,
    bob_side: Option<Label>,
    last_round: usize,
}

impl FAttackKbb {
    pub fn new(carrier_dim: u32) -> Self {
        FAttackKbb {
            state: AttackState::new(PairConversionModel::Kbb { d: carrier_dim }),
            alice_side: None,
            bob_side: None,
            last_round: 0,
        }
    }
}

impl Interceptor for FAttackKbb {
    fn on_round_start(
        &mut self,
        _round: usize,
        op: &RoundOperator,
        ctx: &mut EveCtx,
    ) -> Result<()> {
        let alice_conjugated = match op {
            RoundOperator::FourierPair {
                alice_conjugated, ..
            } => *alice_conjugated,
            _ => return Ok(()),
        };
        if let Some(label) = self.alice_side.clone() {
            // This particle pairs with Alice's key half, so Eve plays the
            // receiver on it.
            let dim = ctx.dim_of(&label)?;
            ctx.apply_gate(&hadamard_gate(dim, !alice_conjugated), &label)?;
        }
        if let Some(label) = self.bob_side.clone() {
            let dim = ctx.dim_of(&label)?;
            ctx.apply_gate(&hadamard_gate(dim, alice_conjugated), &label)?;
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
                let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
                let w = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
                for j in 0..dim {
                    amps[j * dim + j] = w;
                }
                ctx.add_ancilla_state(&[mine.clone(), substitute.clone()], &[dim, dim], amps)?;
                self.alice_side = Some(kept.clone());
                self.bob_side = Some(mine.clone());
                self.state.held = vec![kept, mine];
                Ok(substitute)
            }
            n => {
                let decode_key = self.alice_side.clone().expect("pair established");
                let encode_key = self.bob_side.clone().expect("pair established");
                ctx.apply_controlled(&ControlledGateSpec::LeftShift, &decode_key, &carrier)?;
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
