use thiserror::Error;

/// Errors raised by the estimators, the asymptotic formulas and the simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("tied order statistics: {0}")]
    Tie(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("null-bias singularity: b_alpha(gamma) = 0 at alpha = {alpha}, gamma = {gamma}")]
    NullBias { alpha: f64, gamma: f64 },

    #[error("sign condition violated: {0}")]
    Sign(String),

    #[error("degenerate probe: {0}")]
    DegenerateProbe(String),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("every sweep point failed")]
    EmptyResult,

    #[error("{failures} of {replications} replications failed (limit 1%)")]
    ExcessFailures { failures: usize, replications: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
