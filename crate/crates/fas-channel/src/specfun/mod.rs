//! Special-function kernel: Bessel J0, scaled modified Bessel I0/Ik, and the
//! first-order Marcum Q-function.
//!
//! Everything here is pure `f64` arithmetic with documented accuracy; the
//! Marcum routines take an explicit [`Accuracy`] budget instead of global
//! state so callers in quadrature loops can trade precision for speed.

pub(crate) mod bessel;
mod marcum;

pub use bessel::{bessel_i0_scaled, bessel_i_ratios, bessel_j0};
pub use marcum::{log_one_minus_q1, marcum_q1};

use crate::error::{FasError, Result};

/// Truncation budget for the Marcum series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    /// Absolute tolerance on the truncated tail.
    pub abs_tol: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy {
            abs_tol: 1e-12,
            max_terms: 500,
        }
    }
}

impl Accuracy {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(FasError::Config(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if max_terms < 1 {
            return Err(FasError::Config("max_terms must be at least 1".into()));
        }
        Ok(Accuracy { abs_tol, max_terms })
    }
}
