//! Attack strategies as channel interceptors with classical post-processing
//! over the public board.

mod cnot_ancilla;
mod f_bk;
mod f_kbb;
mod f_zlg;
mod hypotheses;
mod passive;

pub use cnot_ancilla::CnotAncillaInterceptor;
pub use f_bk::FAttackBk;
pub use f_kbb::FAttackKbb;
pub use f_zlg::FAttackZlg;
pub use hypotheses::{resolve_hypotheses, AttackState, Hypothesis, PairConversionModel};
pub use passive::PassiveInterceptor;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{Family, ProtocolConfig};
use crate::runtime::Interceptor;

/// Attack selection by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    Passive,
    CnotAncilla,
    FAttack,
}

impl AttackKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttackKind::Passive => "passive",
            AttackKind::CnotAncilla => "cnot-ancilla",
            AttackKind::FAttack => "f-attack",
        }
    }

    pub fn parse(s: &str) -> Result<AttackKind> {
        Ok(match s {
            "passive" => AttackKind::Passive,
            "cnot-ancilla" => AttackKind::CnotAncilla,
            "f-attack" => AttackKind::FAttack,
            other => {
                return Err(Error::Config(format!(
                    "attack: unknown strategy `{other}` (expected passive, cnot-ancilla or f-attack)"
                )))
            }
        })
    }
}

/// Final verdict on one attacked trial, assembled by the experiment harness
/// from the interceptor summary and the ground-truth transcript.
#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    /// Eve stayed undetected and every message symbol was inferred correctly
    /// after hypothesis resolution.
    pub succeeded: bool,
    /// First check round whose comparison mismatched, if any. Mutually
    /// exclusive with `succeeded`.
    pub detected_at: Option<usize>,
    /// Eve's final per-round symbol estimates.
    pub inferred_symbols: BTreeMap<usize, u32>,
}

/// Builds the interceptor for an attack/protocol pairing, rejecting
/// combinations the strategy is not defined for.
pub fn build_interceptor(
    kind: AttackKind,
    config: &ProtocolConfig,
) -> Result<Box<dyn Interceptor>> {
    match kind {
        AttackKind::Passive => Ok(Box::new(PassiveInterceptor::default())),
        AttackKind::CnotAncilla => {
            if config.family != Family::Zlg {
                return Err(Error::Config(format!(
                    "attack: cnot-ancilla is defined for the zlg family only, not {}",
                    config.family.as_str()
                )));
            }
            Ok(Box::new(CnotAncillaInterceptor::default()))
        }
        AttackKind::FAttack => match config.family {
            Family::Zlg => {
                if (config.theta - FRAC_PI_4).abs() > 1e-9 {
                    return Err(Error::Config(
                        "theta: the pair-conversion attack on zlg assumes theta = pi/4".into(),
                    ));
                }
                Ok(Box::new(FAttackZlg::new(config.theta)))
            }
            Family::ZlgHd => Ok(Box::new(FAttackZlg::new(FRAC_PI_4))),
            Family::Kbb | Family::KbbHd => {
                Ok(Box::new(FAttackKbb::new(config.carrier_dim as u32)))
            }
            Family::Bk | Family::BkHd => Ok(Box::new(FAttackBk::new())),
            other => Err(Error::Config(format!(
                "attack: f-attack is not defined for family {}",
                other.as_str()
            ))),
        },
    }
}
