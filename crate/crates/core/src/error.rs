use thiserror::Error;

/// Errors raised by the solver, seeding and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolitonError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("profile left the positive region near the origin: h = {value} at node {index}")]
    Positivity { index: usize, value: f64 },

    #[error("picard iteration stalled after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("contraction ratio needs at least 3 iterations, run used {0}")]
    InsufficientIterations(usize),

    #[error("fit window too short: {0}")]
    WindowTooShort(String),

    #[error("radius {0} is outside the trajectory range")]
    OutOfRange(f64),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("series and picard seeds disagree at the handoff radius: |dh| = {dh:e}, |dhr| = {dhr:e}")]
    SeederMismatch { dh: f64, dhr: f64 },
}

pub type Result<T> = std::result::Result<T, SolitonError>;
