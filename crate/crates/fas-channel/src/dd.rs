//! Compact double-double arithmetic (~31 significant digits).
//!
//! Used where plain f64 loses the quantity of interest to rounding: the
//! Rayleigh-quotient refinement of near-kernel eigenvalues and the
//! extended-precision series oracle inside the validation suite. Products
//! are split exactly via FMA.

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, f64::mul_add(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        let e = e + self.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let (p, e) = two_prod(self.hi, x);
        let e = e + self.lo * x;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r2 = r.sub(other.mul_f64(q2));
        let q3 = r2.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add_f64(q3)
    }

    /// Exact product of two f64 values.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }
}

/// `v^T A v` in double-double: each row inner product is accumulated as an
/// exact-product sum, then folded against `v` the same way.
pub(crate) fn rayleigh_quotient(matrix: &crate::linalg::Matrix, v: &[f64]) -> f64 {
    let n = v.len();
    let mut total = Dd::ZERO;
    for i in 0..n {
        let row = matrix.row(i);
        let mut inner = Dd::ZERO;
        for j in 0..n {
            inner = inner.add(Dd::prod(row[j], v[j]));
        }
        total = total.add(inner.mul_f64(v[i]));
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_survives() {
        // (1e16 + 1) - 1e16 = 1 exactly in double-double
        let a = Dd::from(1e16).add_f64(1.0);
        let b = a.add_f64(-1e16);
        assert_eq!(b.value(), 1.0);
    }

    #[test]
    fn product_splitting_is_exact() {
        let p = Dd::prod(1.0 + 2f64.powi(-30), 1.0 + 2f64.powi(-30));
        // (1+u)^2 = 1 + 2u + u^2 with u = 2^-30; u^2 = 2^-60 lives in lo
        assert_eq!(p.hi, 1.0 + 2f64.powi(-29));
        assert_eq!(p.lo, 2f64.powi(-60));
    }

    #[test]
    fn division_roundtrip() {
        let x = Dd::from(std::f64::consts::PI);
        let y = Dd::from(std::f64::consts::E);
        let z = x.div(y).mul(y);
        assert!((z.value() - std::f64::consts::PI).abs() < 1e-30);
        assert!((z.sub(x)).value().abs() < 1e-30);
    }

    #[test]
    fn rayleigh_matches_exact_small_case() {
        // A = [[2, 1], [1, 3]], v = [1, 1]/sqrt(2): v'Av = 3.5
        let mut m = crate::linalg::Matrix::zeros(2, 2);
        *m.at_mut(0, 0) = 2.0;
        *m.at_mut(0, 1) = 1.0;
        *m.at_mut(1, 0) = 1.0;
        *m.at_mut(1, 1) = 3.0;
        let s = 0.5f64.sqrt();
        let rho = rayleigh_quotient(&m, &[s, s]);
        assert!((rho - 3.5).abs() < 1e-15);
    }
}
