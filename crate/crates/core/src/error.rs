use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty vector: dimension must be at least 1")]
    Empty,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point is infeasible: {0}")]
    Infeasible(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("bracket violation: residual({lo}) = {f_lo}, residual({hi}) = {f_hi}")]
    BracketViolation { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations ({context})")]
    MaxIterations { iterations: usize, context: &'static str },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("estimator state inconsistent: {0}")]
    State(String),
}

pub type Result<T> = std::result::Result<T, Error>;
