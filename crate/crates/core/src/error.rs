use thiserror::Error;

/// Errors produced by the library.
///
/// Variants mirror the failure classes the CLI maps onto exit codes:
/// validation and domain problems are the caller's fault, capacity errors
/// mean the request is well-formed but too large for the selected backend.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
