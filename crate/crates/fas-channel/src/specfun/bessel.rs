//! Bessel J0 and scaled modified Bessel functions.

use crate::error::{FasError, Result};
use std::f64::consts::{FRAC_PI_4, PI};

/// Zero-order Bessel function of the first kind.
///
/// Three regimes, each accurate to well below `1e-12` absolute:
///
/// * `|x| <= 8` — alternating power series (largest term ~1e2, so rounding
///   stays near machine precision);
/// * `8 < |x| <= 50` — 64-point midpoint rule on the integral representation
///   `J0(x) = (1/pi) \int_0^pi cos(x sin t) dt`; the integrand is pi-periodic
///   and entire, so the rule aliases only harmonics of order >= 128 and the
///   error is bounded by `2 |J_128(x)| < 1e-35`;
/// * `|x| > 50` — Hankel asymptotic expansion, whose optimally truncated
///   error is `O(e^{-2x})`.
///
/// Even symmetry holds by construction (`x` enters through `|x|`).
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(FasError::Domain(format!("bessel_j0: non-finite input {x}")));
    }
    Ok(j0(x))
}

/// Infallible J0 for internal call sites that already know `x` is finite.
pub(crate) fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 8.0 {
        j0_series(ax)
    } else if ax <= 50.0 {
        j0_integral(ax)
    } else {
        j0_hankel(ax)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0f64;
    loop {
        term *= -q / (m * m);
        sum += term;
        if term.abs() < 1e-18 {
            return sum;
        }
        m += 1.0;
    }
}

fn j0_integral(x: f64) -> f64 {
    const M: usize = 64;
    let h = PI / M as f64;
    let mut sum = 0.0;
    for j in 0..M {
        let theta = (j as f64 + 0.5) * h;
        sum += (x * theta.sin()).cos();
    }
    sum / M as f64
}

fn j0_hankel(x: f64) -> f64 {
    // P = sum (-1)^m v_{2m}, Q = sum (-1)^{m+1} v_{2m+1} with
    // v_0 = 1 and v_{k+1} = v_k (k + 1/2)^2 / ((k+1) 2x).
    let tx = 2.0 * x;
    let mut v = 1.0;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut k = 0usize;
    loop {
        let m = k / 2;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * v;
        } else {
            q -= sign * v;
        }
        let kf = k as f64;
        let next = v * (kf + 0.5) * (kf + 0.5) / ((kf + 1.0) * tx);
        // Past the optimal truncation point the asymptotic terms grow again.
        if next < 1e-18 || next >= v || k > 200 {
            break;
        }
        v = next;
        k += 1;
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Exponentially scaled modified Bessel function `e^{-x} I0(x)` for `x >= 0`.
///
/// Power series below `x = 20`, asymptotic expansion above; both regimes sum
/// positive terms only, so there is no cancellation.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= 20.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut m = 1.0f64;
        loop {
            term *= q / (m * m);
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
            m += 1.0;
        }
        sum * (-x).exp()
    } else {
        // I0(x) ~ e^x / sqrt(2 pi x) * sum a_k / x^k,
        // a_0 = 1, a_{k+1} = a_k (2k+1)^2 / (8 (k+1)).
        let mut term = 1.0f64;
        let mut sum = 1.0;
        let mut k = 0.0f64;
        loop {
            let next = term * (2.0 * k + 1.0) * (2.0 * k + 1.0) / (8.0 * (k + 1.0) * x);
            if next >= term || next < 1e-18 {
                sum += next;
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Ratio table `r[k] = I_{k+1}(x) / I_k(x)` for `k = 0 .. len-1`, by Gautschi's
/// backward continued fraction. The recurrence contracts going down, so the
/// arbitrary tail start is washed out by the 40-step pad.
pub fn bessel_i_ratios(x: f64, len: usize) -> Vec<f64> {
    debug_assert!(x >= 0.0);
    if len == 0 {
        return Vec::new();
    }
    if x == 0.0 {
        return vec![0.0; len];
    }
    let start = len + 40;
    let mut r = x / (2.0 * (start as f64 + 1.0));
    let mut table = vec![0.0f64; len];
    for k in (0..start).rev() {
        r = 1.0 / (2.0 * (k as f64 + 1.0) / x + r);
        if k < len {
            table[k] = r;
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_at_zero_is_one() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn j0_even_symmetry() {
        for &x in &[0.3, 2.7, 9.4, 31.2, 77.0] {
            assert_eq!(j0(x), j0(-x));
        }
    }

    #[test]
    fn j0_first_root() {
        // Root located by bisection on the power series before the build;
        // the spec-level oracle comparison lives in tests/specfun_oracle.rs.
        assert!(j0(2.404826).abs() < 1e-5);
    }

    #[test]
    fn j0_regime_boundaries_agree() {
        // Series vs integral at the 8.0 switchover, integral vs Hankel at 50.0.
        for &x in &[7.9, 8.0, 8.1] {
            assert!((j0_series(x) - j0_integral(x)).abs() < 1e-13);
        }
        for &x in &[49.5, 50.0, 50.5] {
            assert!((j0_integral(x) - j0_hankel(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn j0_rejects_non_finite() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }

    #[test]
    fn i0_scaled_reference_values() {
        // I0(0) = 1.
        assert_eq!(bessel_i0_scaled(0.0), 1.0);
        // e^{-x} I0(x) at 40 digits (mpmath), straddling the series /
        // asymptotic switchover at x = 20.
        let cases = [
            (19.999, 0.08978258606096535772971747128666422915084),
            (20.0, 0.08978031188482602159594465366971099207918),
            (20.001, 0.08977803788155497969656311328281376894251),
            (30.0, 0.07314594648223729392892341805408676629974),
        ];
        for (x, want) in cases {
            let got = bessel_i0_scaled(x);
            assert!(
                (got - want).abs() < 1e-15,
                "x={x}: {got} vs {want}"
            );
        }
        // Large-x leading behaviour 1/sqrt(2 pi x).
        let x = 1.0e4;
        let lead = 1.0 / (2.0 * PI * x).sqrt();
        assert!((bessel_i0_scaled(x) / lead - 1.0).abs() < 1e-4);
    }

    #[test]
    fn i_ratios_match_series_quotients() {
        // I1/I0 and I2/I1 from direct power series at a few arguments.
        fn ik_series(k: usize, x: f64) -> f64 {
            let mut fact = 1.0f64;
            for j in 1..=k {
                fact *= j as f64;
            }
            let mut term = (0.5 * x).powi(k as i32) / fact;
            let mut sum = term;
            let q = 0.25 * x * x;
            for m in 1..200 {
                term *= q / (m as f64 * (m + k) as f64);
                sum += term;
            }
            sum
        }
        for &x in &[0.1, 1.0, 5.0, 14.0] {
            let r = bessel_i_ratios(x, 2);
            let r0 = ik_series(1, x) / ik_series(0, x);
            let r1 = ik_series(2, x) / ik_series(1, x);
            assert!((r[0] - r0).abs() < 1e-14 * (1.0 + r0));
            assert!((r[1] - r1).abs() < 1e-14 * (1.0 + r1));
        }
    }
}
