//! Pair-conversion attack on the three-party GHZ protocol.
//!
//! Round one (two transits): measure both flying qubits in z and forward
//! them — the GHZ key collapses to a product state, undetected. Round two:
//! keep both codeword qubits (they carry a three-qubit entangled state with
//! Alice's key half) and deliver one half from each of two fresh Bell pairs;
//! Bob's and Charlie's decode measurements turn the retained halves into
//! Bell pairs with their key qubits. The conversion succeeds when the parity
//! of their outcomes equals Alice's round-two bit (probability one half).
//! From round three on Eve relays: odd rounds are decoded with the two
//! captured qubits independently, even rounds from the parity of both; the
//! re-encode always applies both pair halves, which makes the delivered
//! values exact in the success branch for all collapse cases.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Result;
use crate::qcore::{hadamard_gate, ControlledGateSpec, Label};
use crate::runtime::{
    EveCtx, Interceptor, InterceptorSummary, PartyId, Payload, PublicAnnouncement, RoundOperator,
};

use super::hypotheses::{AttackState, PairConversionModel};

fn bell_amps() -> Vec<Complex64> {
    let w = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    vec![w, zero, zero, w]
}

pub struct FAttackBk {
    state: AttackState,
    /// Captured round-two codeword qubits (three-qubit share with Alice).
    alice_first: Option<Label>,
    alice_second: Option<Label>,
    /// Eve's halves of the pairs shared with Bob and Charlie.
    bob_side: Option<Label>,
    charlie_side: Option<Label>,
    /// First-transit decode value of the current round.
    pending: Option<(usize, u32)>,
    last_round: usize,
}

impl FAttackBk {
    pub fn new() -> Self {
        FAttackBk {
            state: AttackState::new(PairConversionModel::Bk),
            alice_first: None,
            alice_second: None,
            bob_side: None,
            charlie_side: None,
            pending: None,
            last_round: 0,
        }
    }

    fn held(&self) -> Vec<Label> {
        [
            &self.alice_first,
            &self.alice_second,
            &self.bob_side,
            &self.charlie_side,
        ]
        .iter()
        .filter_map(|l| (*l).clone())
        .collect()
    }
}

impl Default for FAttackBk {
    fn default() -> Self {
        Self::new()
    }
}

impl Interceptor for FAttackBk {
    fn on_round_start(
        &mut self,
        _round: usize,
        op: &RoundOperator,
        ctx: &mut EveCtx,
    ) -> Result<()> {
        if matches!(
            op,
            RoundOperator::FourierAll { .. } | RoundOperator::FourierPair { .. }
        ) {
            for label in self.held() {
                let dim = ctx.dim_of(&label)?;
                ctx.apply_gate(&hadamard_gate(dim, false), &label)?;
            }
        }
        Ok(())
    }

    fn on_transit(&mut self, ctx: &mut EveCtx) -> Result<Label> {
        let carrier = ctx.carrier.clone().expect("transit carries a subsystem");
        self.last_round = self.last_round.max(ctx.round);
        let to_bob = ctx.to == PartyId::Bob;
        match ctx.round {
            1 => {
                // Both flying qubits read the same value; record once.
                let v = ctx.measure(&carrier)?;
                if to_bob {
                    self.state.raw_symbols.insert(1, v);
                }
                Ok(carrier)
            }
            2 => {
                let kept = ctx.capture_carrier()?;
                if to_bob {
                    let mine = Label::new("e3");
                    let substitute = Label::new("e4");
                    ctx.add_ancilla_state(&[mine.clone(), substitute.clone()], &[2, 2], bell_amps())?;
                    self.alice_first = Some(kept);
                    self.bob_side = Some(mine);
                    Ok(substitute)
                } else {
                    let mine = Label::new("e5");
                    let substitute = Label::new("e6");
                    ctx.add_ancilla_state(&[mine.clone(), substitute.clone()], &[2, 2], bell_amps())?;
                    self.alice_second = Some(kept);
                    self.charlie_side = Some(mine);
                    self.state.held = self.held();
                    Ok(substitute)
                }
            }
            n => {
                let (decode_key, encode_key) = if to_bob {
                    (
                        self.alice_first.clone().expect("pairs established"),
                        self.bob_side.clone().expect("pairs established"),
                    )
                } else {
                    (
                        self.alice_second.clone().expect("pairs established"),
                        self.charlie_side.clone().expect("pairs established"),
                    )
                };
                ctx.apply_controlled(&ControlledGateSpec::RightShift, &decode_key, &carrier)?;
                let v = ctx.measure(&carrier)?;
                match self.pending.take() {
                    Some((round, first)) if round == n => {
                        // Odd rounds repeat the bit on both qubits; even
                        // rounds carry it in the parity.
                        let raw = if n % 2 == 1 { first } else { first ^ v };
                        self.state.raw_symbols.insert(n, raw);
                    }
                    _ => {
                        self.pending = Some((n, v));
                    }
                }
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
