//! Dense symmetric eigensolvers and a minimal matrix container.
//!
//! Two independent routes are kept on purpose:
//!
//! * [`jacobi_eigen`] — cyclic Jacobi rotations with a relative off-diagonal
//!   threshold. Slower, but on positive semi-definite matrices it resolves
//!   eigenvalues many orders of magnitude below `eps * ||A||`, which the
//!   spectral-truncation analysis relies on. This is the solver behind
//!   spectral models.
//! * [`sym_eigenvalues`] — Householder tridiagonalisation followed by
//!   implicit-shift QL, eigenvalues only. Used where thousands of spectra
//!   (or one very large one) are needed and absolute accuracy suffices.

use crate::error::{FasError, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Largest absolute deviation from symmetry, relative to the largest entry.
    pub fn symmetry_defect(&self) -> f64 {
        let mut scale = 0.0f64;
        let mut defect = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                scale = scale.max(self.at(r, c).abs());
                if c > r {
                    defect = defect.max((self.at(r, c) - self.at(c, r)).abs());
                }
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            defect / scale
        }
    }
}

/// Sorted eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues, non-increasing.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: Matrix,
}

const JACOBI_REL_TOL: f64 = 1e-15;

/// Cyclic Jacobi eigendecomposition.
///
/// A pair `(p, q)` is rotated only while `|a_pq| > tol * sqrt(a_pp * a_qq)`;
/// the sweep loop ends when a full sweep performs no rotation. The relative
/// threshold is what preserves tiny eigenvalues of PSD inputs.
pub fn jacobi_eigen(mut a: Matrix, max_sweeps: usize) -> Result<SymEigen> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "jacobi_eigen requires a square matrix");
    let mut v = Matrix::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0f64; n];

    for _sweep in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                let thresh = (JACOBI_REL_TOL * (d[p].abs() * d[q].abs()).sqrt())
                    .max(f64::MIN_POSITIVE);
                if apq.abs() <= thresh {
                    continue;
                }
                rotated = true;
                let h = d[q] - d[p];
                let t = if apq.abs() * 1e15 < h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                *a.at_mut(p, q) = 0.0;
                for j in 0..p {
                    let g = a.at(j, p);
                    let hh = a.at(j, q);
                    *a.at_mut(j, p) = g - s * (hh + g * tau);
                    *a.at_mut(j, q) = hh + s * (g - hh * tau);
                }
                for j in (p + 1)..q {
                    let g = a.at(p, j);
                    let hh = a.at(j, q);
                    *a.at_mut(p, j) = g - s * (hh + g * tau);
                    *a.at_mut(j, q) = hh + s * (g - hh * tau);
                }
                for j in (q + 1)..n {
                    let g = a.at(p, j);
                    let hh = a.at(q, j);
                    *a.at_mut(p, j) = g - s * (hh + g * tau);
                    *a.at_mut(q, j) = hh + s * (g - hh * tau);
                }
                for j in 0..n {
                    let g = v.at(j, p);
                    let hh = v.at(j, q);
                    *v.at_mut(j, p) = g - s * (hh + g * tau);
                    *v.at_mut(j, q) = hh + s * (g - hh * tau);
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
        if !rotated {
            return Ok(sort_eigen(d, v));
        }
    }

    let mut residual = 0.0f64;
    for p in 0..n.saturating_sub(1) {
        for q in (p + 1)..n {
            let scale = (d[p].abs() * d[q].abs()).sqrt().max(f64::MIN_POSITIVE);
            residual = residual.max(a.at(p, q).abs() / scale);
        }
    }
    Err(FasError::NonConvergence {
        sweeps: max_sweeps,
        residual,
    })
}

/// Eigenvalues only, non-increasing: Householder reduction then QL.
pub fn sym_eigenvalues(mut a: Matrix) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "sym_eigenvalues requires a square matrix");
    let (mut d, mut e) = tridiagonalize(&mut a);
    tql(&mut d, &mut e, None)?;
    d.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(d)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix given its diagonal
/// `d` and sub-diagonal `e` (`e[0]` unused). Returns values sorted
/// non-increasing with aligned vectors.
pub fn tridiag_eigen(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<SymEigen> {
    let n = d.len();
    let mut z = Matrix::identity(n);
    tql(&mut d, &mut e, Some(&mut z))?;
    Ok(sort_eigen(d, z))
}

fn sort_eigen(d: Vec<f64>, v: Matrix) -> SymEigen {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Canonical sign: the largest-magnitude component is positive.
        let mut pivot = 0usize;
        let mut best = 0.0f64;
        for r in 0..n {
            let val = v.at(r, old_col).abs();
            if val > best {
                best = val;
                pivot = r;
            }
        }
        let flip = if v.at(pivot, old_col) < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            *vectors.at_mut(r, new_col) = flip * v.at(r, old_col);
        }
    }
    SymEigen { values, vectors }
}

/// Householder reduction of a symmetric matrix to tridiagonal form, without
/// accumulating the transform. Returns `(diagonal, sub-diagonal)`; the input
/// is consumed as workspace.
fn tridiagonalize(a: &mut Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];

    for i in (1..n).rev() {
        let l = i; // columns 0..l of row i participate
        let mut h = 0.0f64;
        if l > 1 {
            let mut scale = 0.0f64;
            for k in 0..l {
                scale += a.at(i, k).abs();
            }
            if scale == 0.0 {
                e[i] = a.at(i, l - 1);
            } else {
                for k in 0..l {
                    let val = a.at(i, k) / scale;
                    *a.at_mut(i, k) = val;
                    h += val * val;
                }
                let mut f = a.at(i, l - 1);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                *a.at_mut(i, l - 1) = f - g;
                let mut tail_sum = 0.0f64;
                for j in 0..l {
                    let mut g = 0.0f64;
                    for k in 0..=j {
                        g += a.at(j, k) * a.at(i, k);
                    }
                    for k in (j + 1)..l {
                        g += a.at(k, j) * a.at(i, k);
                    }
                    e[j] = g / h;
                    tail_sum += e[j] * a.at(i, j);
                }
                let hh = tail_sum / (h + h);
                for j in 0..l {
                    f = a.at(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        *a.at_mut(j, k) -= f * e[k] + g * a.at(i, k);
                    }
                }
            }
        } else {
            e[i] = a.at(i, l - 1);
        }
        d[i] = h;
    }

    for i in 0..n {
        d[i] = a.at(i, i);
    }
    (d, e)
}

/// Implicit-shift QL iteration on a tridiagonal matrix; accumulates the
/// rotations into `z` when provided.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(FasError::NonConvergence {
                    sweeps: iter,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = pythag(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = pythag(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zm) = z.as_deref_mut() {
                    for k in 0..n {
                        f = zm.at(k, i + 1);
                        *zm.at_mut(k, i + 1) = s * zm.at(k, i) + c * f;
                        *zm.at_mut(k, i) = c * zm.at(k, i) - s * f;
                    }
                }
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn pythag(a: f64, b: f64) -> f64 {
    let (aa, ab) = (a.abs(), b.abs());
    if aa > ab {
        let r = ab / aa;
        aa * (1.0 + r * r).sqrt()
    } else if ab > 0.0 {
        let r = aa / ab;
        ab * (1.0 + r * r).sqrt()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruction_defect(a: &Matrix, eig: &SymEigen) -> f64 {
        let n = a.rows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let mut sum = 0.0;
                for l in 0..n {
                    sum += eig.values[l] * eig.vectors.at(r, l) * eig.vectors.at(c, l);
                }
                worst = worst.max((sum - a.at(r, c)).abs());
            }
        }
        worst
    }

    fn orthonormality_defect(v: &Matrix) -> f64 {
        let n = v.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut dot = 0.0;
                for k in 0..n {
                    dot += v.at(k, i) * v.at(k, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    #[test]
    fn jacobi_2x2_closed_form() {
        let rho = 0.37;
        let a = Matrix::from_fn(2, 2, |r, c| if r == c { 1.0 } else { rho });
        let eig = jacobi_eigen(a, 50).unwrap();
        assert!((eig.values[0] - (1.0 + rho)).abs() < 1e-15);
        assert!((eig.values[1] - (1.0 - rho)).abs() < 1e-15);
    }

    #[test]
    fn jacobi_identity_input() {
        let a = Matrix::identity(6);
        let eig = jacobi_eigen(a.clone(), 50).unwrap();
        for v in &eig.values {
            assert_eq!(*v, 1.0);
        }
        assert!(orthonormality_defect(&eig.vectors) < 1e-14);
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric() {
        // Deterministic pseudo-random symmetric matrix.
        let n = 12;
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = Matrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let val = next();
                *a.at_mut(r, c) = val;
                *a.at_mut(c, r) = val;
            }
        }
        let eig = jacobi_eigen(a.clone(), 50).unwrap();
        assert!(reconstruction_defect(&a, &eig) < 1e-13);
        assert!(orthonormality_defect(&eig.vectors) < 1e-13);
        for w in eig.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn ql_matches_jacobi_on_random_symmetric() {
        let n = 25;
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut a = Matrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let val = next();
                *a.at_mut(r, c) = val;
                *a.at_mut(c, r) = val;
            }
        }
        let jac = jacobi_eigen(a.clone(), 50).unwrap();
        let ql = sym_eigenvalues(a).unwrap();
        for (x, y) in jac.values.iter().zip(ql.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn tridiag_eigen_laguerre_jacobi_matrix() {
        // 2x2 Gauss-Laguerre: nodes 2 -+ sqrt(2), weights from first
        // components; checked against the closed form.
        let d = vec![1.0, 3.0];
        let e = vec![0.0, 1.0];
        let eig = tridiag_eigen(d, e).unwrap();
        let hi = 2.0 + 2.0f64.sqrt();
        let lo = 2.0 - 2.0f64.sqrt();
        assert!((eig.values[0] - hi).abs() < 1e-14);
        assert!((eig.values[1] - lo).abs() < 1e-14);
        let w0 = eig.vectors.at(0, 0) * eig.vectors.at(0, 0);
        let w1 = eig.vectors.at(0, 1) * eig.vectors.at(0, 1);
        assert!((w0 + w1 - 1.0).abs() < 1e-14);
        // integral of x e^{-x} = 1 reproduced by the rule
        assert!((w0 * hi + w1 * lo - 1.0).abs() < 1e-13);
    }
}
