use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular tridiagonal system: zero pivot at row {row}")]
    SingularMatrix { row: usize },

    #[error("finite-difference grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("singular local regression in cube {cube} at time step {step}")]
    SingularCube { cube: usize, step: usize },

    #[error("unsupported payoff for this operation: {0}")]
    UnsupportedPayoff(String),

    #[error("root finding failed: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
