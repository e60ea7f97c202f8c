use thiserror::Error;

/// Errors raised by channel construction, solvers and bound evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("channel gain vector is empty")]
    EmptyGains,

    #[error("channel gain {index} must be positive and finite, got {value}")]
    NonpositiveGain { index: usize, value: f64 },

    #[error("invalid power budget: {0}")]
    InvalidBudget(String),

    #[error("noise standard deviation must be positive and finite, got {0}")]
    InvalidNoise(f64),

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("malformed input law: {0}")]
    MalformedLaw(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("reference distribution has zero mass at index {0}")]
    ZeroReference(usize),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("bound not applicable in this regime: {0}")]
    Regime(String),

    #[error("operation requires at least two transmitters (nt >= 2)")]
    MisoOnly,

    #[error("SISO bound table: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;
