use thiserror::Error;

/// Errors raised by the estimation, testing and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step function does not reach 1 (last value {last}); tail integral diverges")]
    IntegralDiverges { last: f64 },

    #[error("quadrature did not converge: max change {change:e} after {nodes} nodes (tolerance {tolerance:e})")]
    NoConvergence {
        change: f64,
        nodes: usize,
        tolerance: f64,
    },

    #[error("scale ratio is not identifiable: {0}")]
    NotIdentifiable(String),

    #[error("degenerate variance estimate: {0}")]
    DegenerateVariance(String),

    #[error("kernel density estimate {density:e} below floor at x = {point}")]
    DensityFloor { point: f64, density: f64 },

    #[error("zero at-risk count at event time {0}")]
    ZeroAtRisk(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
