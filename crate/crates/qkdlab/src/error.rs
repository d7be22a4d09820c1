//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Dimension constraint violated (out-of-range index, mismatched gate
    /// dimension, Hilbert-space limit exceeded, ...).
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A subsystem label was not found in the layout.
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    /// A layout constraint was violated (duplicate labels, arity mismatch).
    #[error("layout error: {0}")]
    Layout(String),

    /// Two states were expected to share a layout but do not.
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    /// A constructed gate failed the unitarity check.
    #[error("matrix is not unitary: max |G\u{2020}G - I| = {deviation:.3e}")]
    NotUnitary { deviation: f64 },

    /// A party acted on a subsystem it does not hold.
    #[error("custody violation: {0}")]
    Custody(String),

    /// Invalid protocol or experiment configuration. The message names the
    /// offending field and the violated constraint.
    #[error("config error: {0}")]
    Config(String),

    /// Internal numerical fault (zero-probability projection, lost
    /// normalization). Must not occur through sampled operation.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Attack post-processing eliminated every hypothesis.
    #[error("hypothesis contradiction: {0}")]
    HypothesisContradiction(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
