//! First-order Marcum Q-function and its complementary logarithm.
//!
//! Both quantities come from the modified-Bessel series pair
//!
//! ```text
//! Q1(a,b)     = e^{-(a-b)^2/2} * sum_{k>=0} (a/b)^k e^{-ab} I_k(ab)
//! 1 - Q1(a,b) = e^{-(a-b)^2/2} * sum_{k>=1} (b/a)^k e^{-ab} I_k(ab)
//! ```
//!
//! with every term positive. The first series is summed when `b >= a` (where
//! `Q1` is the small side) and the second when `b <= a` (where `1 - Q1` is the
//! small side), so neither quantity is ever produced by subtracting two nearby
//! numbers. The complementary series also converges for `b > a` — the terms
//! just rise to a mode near `b^2/2` before decaying — which is used to rescue
//! `ln(1 - Q1)` in the one corner (`a, b` both small) where `1 - Q1` is tiny
//! with `b > a`.
//!
//! Scaled Bessel values are generated term-by-term from the continued-fraction
//! ratio table in [`super::bessel`], so the exponential prefactor never
//! overflows and arguments as large as `ab ~ 1e4` stay in range.

use super::bessel::{bessel_i0_scaled, bessel_i_ratios};
use super::Accuracy;
use crate::error::{FasError, Result};

/// First-order Marcum Q-function `Q1(a, b)` for `a, b >= 0`.
///
/// Returns a value in `[0, 1]`, non-increasing in `b` and non-decreasing
/// in `a`.
pub fn marcum_q1(a: f64, b: f64, acc: &Accuracy) -> Result<f64> {
    check_args(a, b)?;
    if b == 0.0 {
        return Ok(1.0);
    }
    if a == 0.0 {
        return Ok((-0.5 * b * b).exp());
    }
    let q = if b >= a {
        let sum = directed_sum(a / b, a * b, true, acc)?;
        gauss_factor(a, b) * sum
    } else {
        let log_c = comp_log(a, b, acc)?;
        1.0 - log_c.exp()
    };
    Ok(q.clamp(0.0, 1.0))
}

/// `ln(1 - Q1(a, b))` for `a >= 0`, `b > 0`, computed without forming
/// `1 - Q1` whenever that difference is small.
///
/// `b = 0` is a certain outage miss (`Q1 = 1`) and is signalled as a
/// dedicated error instead of returning `-inf`.
pub fn log_one_minus_q1(a: f64, b: f64, acc: &Accuracy) -> Result<f64> {
    check_args(a, b)?;
    if b == 0.0 {
        return Err(FasError::CertainOutageMiss);
    }
    if a == 0.0 {
        return Ok((-(-0.5 * b * b).exp_m1()).ln());
    }
    if b <= a {
        return comp_log(a, b, acc);
    }
    let sum = directed_sum(a / b, a * b, true, acc)?;
    let q = (gauss_factor(a, b) * sum).clamp(0.0, 1.0);
    if q <= 0.9 {
        Ok((-q).ln_1p())
    } else {
        // 1 - Q1 below 0.1 with b > a only happens with both arguments small,
        // where the complementary series needs ~b^2/2 terms.
        comp_log(a, b, acc)
    }
}

fn check_args(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
        return Err(FasError::Domain(format!(
            "marcum arguments must be finite and non-negative, got a={a}, b={b}"
        )));
    }
    Ok(())
}

fn gauss_factor(a: f64, b: f64) -> f64 {
    let d = a - b;
    (-0.5 * d * d).exp()
}

/// Upper bound on the series index at which terms drop below ~1e-18:
/// geometric decay in the ratio plus the `e^{-k^2/(2x)}` roll-off of the
/// scaled Bessel factors (and, for ratios above one, the rise to the mode
/// near `x * ratio / 2`).
fn term_estimate(ratio: f64, x: f64, cap: usize) -> usize {
    let bessel_k = 9.0 * x.sqrt() + 16.0;
    let est = if ratio < 0.999 {
        let geo = -41.5 / ratio.ln();
        geo.min(bessel_k)
    } else if ratio <= 1.0 {
        bessel_k
    } else {
        let peak = 0.5 * x * ratio;
        peak + 9.0 * peak.max(x).sqrt() + 16.0
    };
    (est.ceil() as usize + 2).min(cap).max(4)
}

/// Sum `sum_{k>=k0} ratio^k * e^{-x} I_k(x)` with `k0 = 0` (include_i0) or 1.
fn directed_sum(ratio: f64, x: f64, include_i0: bool, acc: &Accuracy) -> Result<f64> {
    let i0 = bessel_i0_scaled(x);
    let mut len = term_estimate(ratio, x, acc.max_terms);
    loop {
        let r = bessel_i_ratios(x, len);
        let mut term = if include_i0 { i0 } else { ratio * i0 * r[0] };
        let mut sum = term;
        let mut k = 0usize;
        let converged = loop {
            let idx = if include_i0 { k } else { k + 1 };
            if idx >= len {
                break false;
            }
            let rho = ratio * r[idx];
            if rho < 1.0 && term * rho / (1.0 - rho) <= acc.abs_tol * sum.max(1e-300) {
                break true;
            }
            term *= rho;
            sum += term;
            if term == 0.0 {
                break true;
            }
            k += 1;
        };
        if converged {
            return Ok(sum);
        }
        if len >= acc.max_terms {
            return Err(FasError::Accuracy {
                message: format!(
                    "marcum series not converged within {} terms (ratio {ratio:.3e}, x {x:.3e})",
                    acc.max_terms
                ),
                partial: sum,
                error_estimate: term,
            });
        }
        len = (len * 2).min(acc.max_terms);
    }
}

/// `ln(1 - Q1)` through the complementary series, normalised by its first
/// term so the result is finite even when `1 - Q1` underflows `f64`.
fn comp_log(a: f64, b: f64, acc: &Accuracy) -> Result<f64> {
    let ratio = b / a;
    let x = a * b;
    let i0 = bessel_i0_scaled(x);
    let mut len = term_estimate(ratio, x, acc.max_terms);
    loop {
        let r = bessel_i_ratios(x, len);
        // t_1 = ratio * I1_scaled; tau_k = t_k / t_1.
        let ln_t1 = ratio.ln() + i0.ln() + r[0].ln();
        let mut tau = 1.0f64;
        let mut sum = 1.0f64;
        let mut k = 1usize;
        let converged = loop {
            if k >= len {
                break false;
            }
            let rho = ratio * r[k];
            if rho < 1.0 && tau * rho / (1.0 - rho) <= acc.abs_tol * sum {
                break true;
            }
            tau *= rho;
            sum += tau;
            if tau == 0.0 {
                break true;
            }
            k += 1;
        };
        if converged {
            let d = a - b;
            return Ok(-0.5 * d * d + ln_t1 + sum.ln());
        }
        if len >= acc.max_terms {
            return Err(FasError::Accuracy {
                message: format!(
                    "complementary marcum series not converged within {} terms (a {a:.3e}, b {b:.3e})",
                    acc.max_terms
                ),
                partial: -0.5 * (a - b) * (a - b) + ln_t1 + sum.ln(),
                error_estimate: tau,
            });
        }
        len = (len * 2).min(acc.max_terms);
    }
}
