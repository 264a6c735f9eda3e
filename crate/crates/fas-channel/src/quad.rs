//! Quadrature rules for the outage evaluators.

use crate::error::{FasError, Result};
use crate::linalg::tridiag_eigen;

/// Gauss-Laguerre rule for `int_0^inf e^{-u} f(u) du`, nodes ascending.
///
/// Built by Golub-Welsch on the Laguerre Jacobi matrix (diagonal `2i+1`,
/// sub-diagonal `i`); weights are the squared first components of the
/// normalised eigenvectors. Weights of the far nodes underflow to zero for
/// large rules, which is harmless: their true contribution is below the f64
/// range anyway.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(FasError::Config("quadrature needs at least one node".into()));
        }
        let d: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
        let mut e: Vec<f64> = (0..n).map(|i| i as f64).collect();
        e[0] = 0.0;
        let eig = tridiag_eigen(d, e)?;
        // tridiag_eigen sorts non-increasing; flip to ascending nodes.
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut log_weights = Vec::with_capacity(n);
        for idx in (0..n).rev() {
            nodes.push(eig.values[idx]);
            let q0 = eig.vectors.at(0, idx).abs();
            weights.push(q0 * q0);
            // log form survives even where q0^2 underflows
            log_weights.push(2.0 * q0.ln());
        }
        Ok(GaussLaguerre {
            nodes,
            weights,
            log_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln(w_i)`, finite even for far nodes whose weights underflow `f64`.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Largest node of the rule.
    pub fn max_node(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * f(u))
            .sum()
    }
}

/// Adaptive Simpson on a finite interval with per-panel relative control.
///
/// Bisects until `|S_fine - S_coarse| <= 15 rel_tol |S_fine|` locally (or an
/// absolute floor scaled off the first whole-interval estimate); runs of
/// panels that bottom out at `max_depth` without meeting the bound trigger an
/// accuracy error carrying the partial value.
pub fn adaptive_simpson(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: usize,
) -> Result<f64> {
    if !(b >= a) {
        return Err(FasError::Domain(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let abs_floor = rel_tol * whole.abs().max(1e-300);
    let mut worst_defect = 0.0f64;
    let value = simpson_recurse(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        rel_tol,
        abs_floor,
        max_depth,
        &mut worst_defect,
    );
    if worst_defect > 0.0 {
        return Err(FasError::Accuracy {
            message: format!(
                "adaptive quadrature did not meet rel_tol {rel_tol:e} within depth {max_depth}"
            ),
            partial: value,
            error_estimate: worst_defect,
        });
    }
    Ok(value)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rel_tol: f64,
    abs_floor: f64,
    depth: usize,
    worst_defect: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    let defect = (refined - whole).abs();
    if defect <= 15.0 * (rel_tol * refined.abs()).max(abs_floor) {
        return refined + (refined - whole) / 15.0;
    }
    if depth == 0 {
        *worst_defect = worst_defect.max(defect / 15.0);
        return refined + (refined - whole) / 15.0;
    }
    simpson_recurse(
        f, a, m, fa, flm, fm, left, rel_tol, abs_floor, depth - 1, worst_defect,
    ) + simpson_recurse(
        f, m, b, fm, frm, fb, right, rel_tol, abs_floor, depth - 1, worst_defect,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_integrates_monomials_exactly() {
        // Rule of n nodes is exact for polynomials of degree 2n-1;
        // int_0^inf u^k e^{-u} du = k!.
        let rule = GaussLaguerre::new(8).unwrap();
        let mut factorial = 1.0f64;
        for k in 0..=15usize {
            if k > 0 {
                factorial *= k as f64;
            }
            let got = rule.integrate(|u| u.powi(k as i32));
            assert!(
                (got - factorial).abs() <= 1e-10 * factorial,
                "k={k}: {got} vs {factorial}"
            );
        }
    }

    #[test]
    fn laguerre_weights_sum_to_one() {
        for &n in &[4usize, 24, 96, 192] {
            let rule = GaussLaguerre::new(n).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "n={n}: {sum}");
            for w in rule.weights() {
                assert!(*w >= 0.0);
            }
            for pair in rule.nodes().windows(2) {
                assert!(pair[0] < pair[1]);
            }
        }
    }

    #[test]
    fn laguerre_smooth_decaying_integrand() {
        // int_0^inf e^{-u} / (1 + u) du = e * E_1(1) = 0.596347362323194...
        let rule = GaussLaguerre::new(96).unwrap();
        let got = rule.integrate(|u| 1.0 / (1.0 + u));
        assert!((got - 0.596347362323194).abs() < 1e-4);
    }

    #[test]
    fn simpson_matches_closed_forms() {
        let mut f = |x: f64| x.exp();
        let got = adaptive_simpson(&mut f, 0.0, 1.0, 1e-12, 40).unwrap();
        assert!((got - (1f64.exp() - 1.0)).abs() < 1e-11);

        let mut g = |x: f64| (x * x).sin();
        let got = adaptive_simpson(&mut g, 0.0, 3.0, 1e-11, 40).unwrap();
        // Fresnel-type reference computed with a fine fixed Simpson grid.
        let mut reference = 0.0;
        let steps = 600_000;
        let h = 3.0 / steps as f64;
        for i in 0..steps {
            let x0 = i as f64 * h;
            reference += h / 6.0
                * ((x0 * x0).sin()
                    + 4.0 * ((x0 + 0.5 * h) * (x0 + 0.5 * h)).sin()
                    + ((x0 + h) * (x0 + h)).sin());
        }
        assert!((got - reference).abs() < 1e-9, "{got} vs {reference}");
    }

    #[test]
    fn simpson_zero_width_interval() {
        let mut f = |_x: f64| 7.0;
        assert_eq!(adaptive_simpson(&mut f, 2.0, 2.0, 1e-9, 30).unwrap(), 0.0);
    }
}
