use super::Point2;

/// Number of monomials of total degree at most `m` in two variables.
pub const fn monomial_dim(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

/// Graded-lexicographic position of the exponent pair `(a, b)`.
///
/// Within a degree block the order is `x^d, x^{d-1} y, ..., y^d`.
pub const fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

/// Inverse of [`monomial_index`].
pub fn monomial_exponents(i: usize) -> (usize, usize) {
    let mut d = 0;
    while monomial_dim(d) <= i {
        d += 1;
    }
    let b = i - d * (d + 1) / 2;
    (d - b, b)
}

/// Monomials `((x - x_E)/h_E)^a ((y - y_E)/h_E)^b` with `a + b <= degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMonomialBasis {
    pub centroid: Point2,
    pub diameter: f64,
    pub degree: usize,
}

impl ScaledMonomialBasis {
    pub fn new(centroid: Point2, diameter: f64, degree: usize) -> Self {
        debug_assert!(diameter > 0.0);
        Self {
            centroid,
            diameter,
            degree,
        }
    }

    pub fn dim(&self) -> usize {
        monomial_dim(self.degree)
    }

    /// Same anchor, different degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        Self { degree, ..*self }
    }

    /// Scaled local coordinates of `p`.
    #[inline]
    pub fn local(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.centroid.x) / self.diameter,
            (p.y - self.centroid.y) / self.diameter,
        )
    }

    pub fn eval(&self, p: Point2) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(p, &mut out);
        out
    }

    /// Fills `out` with monomial values; `out.len()` selects the degree cut.
    pub fn eval_into(&self, p: Point2, out: &mut [f64]) {
        let (u, v) = self.local(p);
        eval_local(u, v, out);
    }

    /// Gradients of all basis monomials in physical coordinates.
    pub fn eval_grad(&self, p: Point2) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let (u, v) = self.local(p);
        let lower = if self.degree == 0 {
            vec![]
        } else {
            let mut l = vec![0.0; monomial_dim(self.degree - 1)];
            eval_local(u, v, &mut l);
            l
        };
        let mut gx = vec![0.0; n];
        let mut gy = vec![0.0; n];
        for (i, (gxi, gyi)) in gx.iter_mut().zip(gy.iter_mut()).enumerate() {
            let (a, b) = monomial_exponents(i);
            if a > 0 {
                *gxi = a as f64 * lower[monomial_index(a - 1, b)] / self.diameter;
            }
            if b > 0 {
                *gyi = b as f64 * lower[monomial_index(a, b - 1)] / self.diameter;
            }
        }
        (gx, gy)
    }
}

/// Evaluates `u^a v^b` in graded-lex order for as many entries as `out` holds.
pub(crate) fn eval_local(u: f64, v: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    let mut i = 1;
    let mut d = 1;
    while i < out.len() {
        // degree-d block from the degree-(d-1) block
        let prev = (d - 1) * d / 2;
        for b in 0..=d {
            if i >= out.len() {
                return;
            }
            out[i] = if b < d {
                out[prev + b] * u
            } else {
                out[prev + d - 1] * v
            };
            i += 1;
        }
        d += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for i in 0..monomial_dim(8) {
            let (a, b) = monomial_exponents(i);
            assert_eq!(monomial_index(a, b), i);
        }
        assert_eq!(monomial_dim(3), 10);
    }

    #[test]
    fn degree_one_eval() {
        let b = ScaledMonomialBasis::new(Point2::new(0.0, 0.0), 1.0, 1);
        assert_eq!(b.eval(Point2::new(0.5, 0.0)), vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn centroid_gives_unit_vector() {
        let b = ScaledMonomialBasis::new(Point2::new(0.3, -0.2), 0.7, 4);
        let v = b.eval(b.centroid);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mixed_monomial_value() {
        let b = ScaledMonomialBasis::new(Point2::new(1.0, 1.0), 2.0, 2);
        let v = b.eval(Point2::new(2.0, 2.0));
        assert!((v[monomial_index(1, 1)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn values_match_powers() {
        let b = ScaledMonomialBasis::new(Point2::new(0.1, 0.2), 0.5, 5);
        let p = Point2::new(0.4, -0.3);
        let (u, v) = b.local(p);
        let vals = b.eval(p);
        for (i, val) in vals.iter().enumerate() {
            let (a, e) = monomial_exponents(i);
            assert!((val - u.powi(a as i32) * v.powi(e as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let b = ScaledMonomialBasis::new(Point2::new(0.1, 0.2), 0.5, 4);
        let p = Point2::new(0.33, 0.05);
        let (gx, gy) = b.eval_grad(p);
        let eps = 1e-6;
        let fxp = b.eval(Point2::new(p.x + eps, p.y));
        let fxm = b.eval(Point2::new(p.x - eps, p.y));
        let fyp = b.eval(Point2::new(p.x, p.y + eps));
        let fym = b.eval(Point2::new(p.x, p.y - eps));
        for i in 0..b.dim() {
            assert!((gx[i] - (fxp[i] - fxm[i]) / (2.0 * eps)).abs() < 1e-7);
            assert!((gy[i] - (fyp[i] - fym[i]) / (2.0 * eps)).abs() < 1e-7);
        }
    }
}
