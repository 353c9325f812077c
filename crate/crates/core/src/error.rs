use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LseError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("singular linear system (lambda = 0 with rank-deficient H H^H)")]
    Singular,

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: &'static str, value: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("formula leaves its validity region: {0}")]
    OutOfRegion(String),

    #[error("enumeration of {states} states exceeds the limit {limit}")]
    TooLarge { states: f64, limit: u64 },

    #[error("an empirical spectrum has no matrix realization")]
    NoRealization,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty input")]
    Empty,
}

pub type Result<T, E = LseError> = core::result::Result<T, E>;
