//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the numerical kernels and model constructors.
#[derive(Debug, Clone, Error)]
pub enum FasError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration violates an invariant (port count, aperture, power, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A series or quadrature did not reach the requested tolerance.
    /// `partial` carries the best value obtained so far.
    #[error("accuracy not reached: {message} (partial value {partial:e}, error estimate {error_estimate:e})")]
    Accuracy {
        message: String,
        partial: f64,
        error_estimate: f64,
    },

    /// An iterative solver exhausted its sweep budget.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    /// `ln(1 - Q1(a, 0))` is -inf: the outage event is missed with certainty.
    #[error("certain outage miss: Q1(a, 0) = 1 so ln(1 - Q1) diverges")]
    CertainOutageMiss,

    /// A model constructor was handed inconsistent pieces.
    #[error("construction error: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, FasError>;
