//! Replication-count selection for the second-stage approximation.
//!
//! The row-independent matrix approximates the column-independent one best
//! when the covariance mass that replication wipes out is the mass worth
//! wiping: subtracting `sigma^2` from an entry reduces its magnitude exactly
//! while the entry exceeds `sigma^2 / 2`, i.e. while
//! `J0(2 pi (R-1) W / (N-1)) > 1/2`. Two selectors are exposed:
//!
//! * [`solve_p3`] — the divisor-constrained minimiser of the exact block
//!   objective (the brute-force-checkable rule);
//! * [`select_replication`] — the closed-form `R* = min{floor(1.52 (N-1) /
//!   (2 pi W)), N}` rule that drops the divisibility constraint, clamped
//!   below at 1 so downstream `1/R` exponents stay defined.

use crate::covariance::FasConfig;
use crate::error::{FasError, Result};
use crate::specfun::bessel::j0;
use std::f64::consts::PI;

/// `J0(x) = 1/2` at `x ~ 1.52`; the closed-form rule uses the rounded root.
const HALF_CROSSING: f64 = 1.52;

/// Closed-form replication count `max(1, min(floor(1.52 (N-1)/(2 pi W)), N))`.
pub fn select_replication(config: &FasConfig) -> Result<usize> {
    config.validate()?;
    if config.n_ports < 2 {
        return Err(FasError::Domain(
            "select_replication needs at least 2 ports".into(),
        ));
    }
    let n = config.n_ports as f64;
    let raw = (HALF_CROSSING * (n - 1.0) / (2.0 * PI * config.width)).floor();
    Ok((raw.max(1.0).min(n)) as usize)
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=n).filter(|d| n % d == 0).collect();
    out.sort_unstable();
    out
}

/// Block objective of the replication relaxation: the induced 1-norm of the
/// Jake covariance after `sigma^2` is subtracted on `r x r` diagonal blocks,
/// computed column-by-column. Requires `r` to divide `N`.
pub fn p3_objective(config: &FasConfig, r: usize) -> Result<f64> {
    config.validate()?;
    let n = config.n_ports;
    if r < 1 || n % r != 0 {
        return Err(FasError::Domain(format!(
            "replication {r} does not divide the port count {n}"
        )));
    }
    let c = config.spacing_ratio();
    let s2 = config.sigma2;
    let j: Vec<f64> = (0..n)
        .map(|d| if d == 0 { 1.0 } else { j0(2.0 * PI * d as f64 * c) })
        .collect();
    let mut worst = 0.0f64;
    for col in 0..n {
        let block = col / r;
        let mut sum = 0.0;
        for row in 0..n {
            let val = j[row.abs_diff(col)];
            let sub = if row / r == block { 1.0 } else { 0.0 };
            sum += (val - sub).abs();
        }
        worst = worst.max(sum * s2);
    }
    Ok(worst)
}

/// Result of the divisor-constrained replication search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P3Solution {
    /// Minimising divisor of `N` (ties resolved toward the greater divisor).
    pub replication: usize,
    /// Objective value at the minimiser.
    pub objective: f64,
    /// Whether `J0(2 pi (R-1) W/(N-1)) <= 1/2` holds at the minimiser. The
    /// turning-point condition cannot hold at `R = 1` (where `J0(0) = 1`),
    /// so a false flag marks the degenerate strongly-correlated corner.
    pub condition_satisfied: bool,
}

/// Minimise the block objective over the divisors of `N`.
pub fn solve_p3(config: &FasConfig) -> Result<P3Solution> {
    config.validate()?;
    let n = config.n_ports;
    if n < 2 {
        return Err(FasError::Domain("solve_p3 needs at least 2 ports".into()));
    }
    let mut best_r = 1usize;
    let mut best_obj = f64::INFINITY;
    for r in divisors(n) {
        let obj = p3_objective(config, r)?;
        if obj < best_obj || (obj == best_obj && r > best_r) {
            best_obj = obj;
            best_r = r;
        }
    }
    let c = config.spacing_ratio();
    let edge = j0(2.0 * PI * (best_r as f64 - 1.0) * c);
    Ok(P3Solution {
        replication: best_r,
        objective: best_obj,
        condition_satisfied: edge <= 0.5,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, w: f64) -> FasConfig {
        FasConfig::new(n, w, 1.0, 0.0).unwrap()
    }

    #[test]
    fn closed_form_rule_examples() {
        // floor(1.52 * 99 / (2 pi)) = 23
        assert_eq!(select_replication(&cfg(100, 1.0)).unwrap(), 23);
        // floor(1.52 * 199 / (8 pi)) = 12
        assert_eq!(select_replication(&cfg(200, 4.0)).unwrap(), 12);
        // floor(1.52 / (10 pi)) = 0, clamped to 1
        assert_eq!(select_replication(&cfg(2, 5.0)).unwrap(), 1);
        // floor(1.52 * 9 / (0.2 pi)) = 21 > N, capped at N
        assert_eq!(select_replication(&cfg(10, 0.1)).unwrap(), 10);
    }

    #[test]
    fn divisors_are_complete() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(7), vec![1, 7]);
    }

    #[test]
    fn objective_rejects_non_divisors() {
        assert!(p3_objective(&cfg(12, 1.0), 5).is_err());
        assert!(p3_objective(&cfg(12, 1.0), 0).is_err());
    }

    #[test]
    fn objective_r1_is_plain_one_norm_of_offdiagonal() {
        let config = cfg(6, 0.8);
        let obj = p3_objective(&config, 1).unwrap();
        // direct column sums of |J0| off the diagonal
        let c = config.spacing_ratio();
        let mut worst = 0.0f64;
        for col in 0..6i64 {
            let mut sum = 0.0;
            for row in 0..6i64 {
                if row != col {
                    sum += j0(2.0 * PI * (row - col).abs() as f64 * c).abs();
                }
            }
            worst = worst.max(sum);
        }
        assert!((obj - worst).abs() < 1e-14);
    }

    #[test]
    fn objective_full_block_in_the_wide_limit() {
        // For a huge aperture the covariance is nearly diagonal and
        // subtracting sigma^2 everywhere costs ~(N-1) sigma^2.
        let config = cfg(8, 400.0);
        let obj = p3_objective(&config, 8).unwrap();
        assert!((obj - 7.0).abs() < 0.2, "{obj}");
    }

    #[test]
    fn strongly_correlated_pair_prefers_full_block() {
        // W = 0.01, N = 2: the off-diagonal is ~0.999 sigma^2, so wiping it
        // with the full 2x2 block beats leaving it (R = 1). The turning-point
        // condition fails there, which the flag records.
        let sol = solve_p3(&cfg(2, 0.01)).unwrap();
        assert_eq!(sol.replication, 2);
        assert!(!sol.condition_satisfied);
    }
}
