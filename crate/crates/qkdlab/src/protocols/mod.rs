//! The protocol state machines: the two-party Bell-key family (plain,
//! non-orthogonal carriers, the two classical-communication check variants,
//! and the higher-dimensional repair), the d-level family and its repair,
//! and the three-party GHZ secret-sharing family and its repair.

mod bk;
mod check;
mod kbb;
mod zlg;

pub use bk::{codeword_amplitudes as codeword_amplitudes_public, BkProtocol};
pub use check::ZlgCheckProtocol;
pub use kbb::KbbProtocol;
pub use zlg::{ZlgHdProtocol, ZlgProtocol};

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Label, StateVector};
use crate::runtime::{QuantumChannel, Session, SessionRng};

/// Protocol family selector. Serialized names are the CLI-facing ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Zlg,
    ZlgNonorth,
    ZlgCheckA,
    ZlgCheckB,
    ZlgHd,
    Kbb,
    KbbHd,
    Bk,
    BkHd,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Zlg => "zlg",
            Family::ZlgNonorth => "zlg-nonorth",
            Family::ZlgCheckA => "zlg-check-a",
            Family::ZlgCheckB => "zlg-check-b",
            Family::ZlgHd => "zlg-hd",
            Family::Kbb => "kbb",
            Family::KbbHd => "kbb-hd",
            Family::Bk => "bk",
            Family::BkHd => "bk-hd",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Ok(match s {
            "zlg" => Family::Zlg,
            "zlg-nonorth" => Family::ZlgNonorth,
            "zlg-check-a" => Family::ZlgCheckA,
            "zlg-check-b" => Family::ZlgCheckB,
            "zlg-hd" => Family::ZlgHd,
            "kbb" => Family::Kbb,
            "kbb-hd" => Family::KbbHd,
            "bk" => Family::Bk,
            "bk-hd" => Family::BkHd,
            other => {
                return Err(Error::Config(format!(
                    "protocol: unknown family `{other}` (expected one of zlg, zlg-nonorth, zlg-check-a, zlg-check-b, zlg-hd, kbb, kbb-hd, bk, bk-hd)"
                )))
            }
        })
    }

    pub fn has_charlie(&self) -> bool {
        matches!(self, Family::Bk | Family::BkHd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundKind {
    Message,
    Check,
}

/// Result of one protocol round.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub round: usize,
    pub alice_symbol: u32,
    pub bob_symbol: u32,
    pub charlie_symbol: Option<u32>,
    pub round_kind: RoundKind,
    pub detected: bool,
}

/// When check-round values get publicly compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckComparison {
    /// Announced and compared right after the round.
    Immediate,
    /// Announced and compared after the full run (the classical-communication
    /// variants reveal their check choices only at the end).
    Batched,
}

/// Full protocol parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub family: Family,
    /// Bilateral rotation angle for the rotation-based families.
    pub theta: f64,
    /// Dimension of each shared key subsystem (d or D).
    pub key_dim: usize,
    /// Dimension of the flying carrier.
    pub carrier_dim: usize,
    /// Non-orthogonal carrier amplitudes (zlg-nonorth only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Check variants: schedule exactly equal counts of the three round
    /// modes instead of drawing an independent coin per round.
    #[serde(default)]
    pub exact_mode_counts: bool,
}

impl ProtocolConfig {
    /// Family defaults: plain two-dimensional keys, theta = pi/4.
    pub fn new(family: Family) -> Self {
        let (key_dim, carrier_dim) = match family {
            Family::Zlg | Family::ZlgNonorth | Family::ZlgCheckA | Family::ZlgCheckB => (2, 2),
            Family::ZlgHd => (4, 2),
            Family::Kbb => (3, 3),
            Family::KbbHd => (4, 2),
            Family::Bk => (2, 2),
            Family::BkHd => (4, 2),
        };
        ProtocolConfig {
            family,
            theta: FRAC_PI_4,
            key_dim,
            carrier_dim,
            alpha: None,
            beta: None,
            exact_mode_counts: false,
        }
    }

    pub fn with_key_dim(mut self, d: usize) -> Self {
        self.key_dim = d;
        if self.family == Family::Kbb {
            self.carrier_dim = d;
        }
        self
    }

    pub fn with_carrier_dim(mut self, k: usize) -> Self {
        self.carrier_dim = k;
        self
    }

    pub fn with_carrier_amplitudes(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = Some(alpha);
        self.beta = Some(beta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::Config("theta: must be finite".into()));
        }
        match self.family {
            Family::Zlg | Family::ZlgCheckA | Family::ZlgCheckB => {
                if self.key_dim != 2 || self.carrier_dim != 2 {
                    return Err(Error::Config(format!(
                        "key_dim/carrier_dim: family {} requires both equal to 2",
                        self.family.as_str()
                    )));
                }
            }
            Family::ZlgNonorth => {
                if self.key_dim != 2 || self.carrier_dim != 2 {
                    return Err(Error::Config(
                        "key_dim/carrier_dim: zlg-nonorth requires both equal to 2".into(),
                    ));
                }
                let (a, b) = match (self.alpha, self.beta) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(Error::Config(
                            "alpha/beta: zlg-nonorth requires both carrier amplitudes".into(),
                        ))
                    }
                };
                if a.abs() < 1e-9 || b.abs() < 1e-9 {
                    return Err(Error::Config(
                        "alpha/beta: both must be nonzero".into(),
                    ));
                }
                if (a - b).abs() < 1e-9 {
                    return Err(Error::Config(
                        "alpha/beta: equal amplitudes are forbidden (alpha != beta)".into(),
                    ));
                }
                if (a * a + b * b - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(
                        "alpha/beta: must satisfy alpha^2 + beta^2 = 1".into(),
                    ));
                }
            }
            Family::ZlgHd | Family::BkHd => {
                if self.key_dim < 4 || self.key_dim % 2 != 0 {
                    return Err(Error::Config(format!(
                        "key_dim: family {} requires an even key dimension D = 2d >= 4, got {}",
                        self.family.as_str(),
                        self.key_dim
                    )));
                }
                if self.carrier_dim != 2 {
                    return Err(Error::Config(format!(
                        "carrier_dim: family {} uses qubit carriers (dimension 2)",
                        self.family.as_str()
                    )));
                }
            }
            Family::Kbb => {
                if self.key_dim < 2 {
                    return Err(Error::Config(
                        "key_dim: kbb requires d >= 2".into(),
                    ));
                }
                if self.carrier_dim != self.key_dim {
                    return Err(Error::Config(
                        "carrier_dim: kbb carriers share the key dimension d".into(),
                    ));
                }
            }
            Family::KbbHd => {
                let k = self.carrier_dim;
                if k < 2 {
                    return Err(Error::Config(
                        "carrier_dim: kbb-hd requires k >= 2".into(),
                    ));
                }
                if self.key_dim % k != 0 || self.key_dim / k < 2 {
                    return Err(Error::Config(format!(
                        "key_dim: kbb-hd requires D = k*d with d >= 2 (got D = {}, k = {k})",
                        self.key_dim
                    )));
                }
            }
            Family::Bk => {
                if self.key_dim != 2 || self.carrier_dim != 2 {
                    return Err(Error::Config(
                        "key_dim/carrier_dim: bk requires both equal to 2".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Size of the per-round symbol alphabet.
    pub fn symbol_dim(&self) -> u32 {
        match self.family {
            Family::Kbb => self.key_dim as u32,
            Family::KbbHd => self.carrier_dim as u32,
            _ => 2,
        }
    }
}

/// One protocol state machine. Sessions are created by the protocol and
/// advanced one round at a time.
pub trait Protocol {
    fn config(&self) -> &ProtocolConfig;

    /// Shared-key subsystem labels in layout order.
    fn key_labels(&self) -> Vec<Label>;

    fn init_session(&self, channel: QuantumChannel, rng: SessionRng) -> Result<Session>;

    /// Called once before the first round of a trial.
    fn begin_trial(&mut self, _session: &mut Session, _total_rounds: usize) -> Result<()> {
        Ok(())
    }

    /// Runs one round: Alice's symbol in, receiver symbols out. For the
    /// check variants the scheduled kind is overridden by Alice's private
    /// mode coin; the actual kind is in the outcome.
    fn run_round(
        &mut self,
        session: &mut Session,
        symbol: u32,
        kind: RoundKind,
    ) -> Result<RoundOutcome>;

    /// Expected key state after `completed_rounds` passive rounds, built
    /// from explicit amplitude formulas (independent of the gate path).
    fn ideal_key_state(&self, completed_rounds: usize) -> Result<StateVector>;

    fn check_comparison(&self) -> CheckComparison {
        CheckComparison::Immediate
    }
}

/// Instantiates the state machine for a validated config.
pub fn build_protocol(config: &ProtocolConfig) -> Result<Box<dyn Protocol>> {
    config.validate()?;
    Ok(match config.family {
        Family::Zlg | Family::ZlgNonorth => Box::new(ZlgProtocol::new(config.clone())?),
        Family::ZlgCheckA | Family::ZlgCheckB => Box::new(ZlgCheckProtocol::new(config.clone())?),
        Family::ZlgHd => Box::new(ZlgHdProtocol::new(config.clone())?),
        Family::Kbb | Family::KbbHd => Box::new(KbbProtocol::new(config.clone())?),
        Family::Bk | Family::BkHd => Box::new(BkProtocol::new(config.clone())?),
    })
}
