use super::monomial::{eval_local, monomial_dim, monomial_exponents, monomial_index};
use super::{Point2, ScaledMonomialBasis};

/// Bivariate polynomial stored by its coefficients in a scaled monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    pub basis: ScaledMonomialBasis,
    pub coeffs: Vec<f64>,
}

impl Poly2 {
    pub fn new(basis: ScaledMonomialBasis, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), basis.dim(), "coefficient count must match basis");
        Self { basis, coeffs }
    }

    pub fn zero(basis: ScaledMonomialBasis) -> Self {
        Self::new(basis, vec![0.0; basis.dim()])
    }

    pub fn constant(basis: ScaledMonomialBasis, c: f64) -> Self {
        let mut p = Self::zero(basis);
        p.coeffs[0] = c;
        p
    }

    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn eval(&self, p: Point2) -> f64 {
        let (u, v) = self.basis.local(p);
        let mut m = vec![0.0; self.coeffs.len()];
        eval_local(u, v, &mut m);
        m.iter().zip(&self.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Product of two polynomials sharing the same anchor.
    pub fn mul(&self, other: &Poly2) -> Poly2 {
        debug_assert!(same_anchor(&self.basis, &other.basis));
        let basis = self.basis.with_degree(self.degree() + other.degree());
        let mut out = vec![0.0; basis.dim()];
        for (i, &ci) in self.coeffs.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            let (a1, b1) = monomial_exponents(i);
            for (j, &cj) in other.coeffs.iter().enumerate() {
                let (a2, b2) = monomial_exponents(j);
                out[monomial_index(a1 + a2, b1 + b2)] += ci * cj;
            }
        }
        Poly2::new(basis, out)
    }

    /// Sum, promoted to the larger degree.
    pub fn add(&self, other: &Poly2) -> Poly2 {
        debug_assert!(same_anchor(&self.basis, &other.basis));
        let deg = self.degree().max(other.degree());
        let mut out = vec![0.0; monomial_dim(deg)];
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o += c;
        }
        for (o, c) in out.iter_mut().zip(&other.coeffs) {
            *o += c;
        }
        Poly2::new(self.basis.with_degree(deg), out)
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        Poly2::new(self.basis, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.scale(-1.0))
    }

    pub fn dx(&self) -> Poly2 {
        self.derivative(true)
    }

    pub fn dy(&self) -> Poly2 {
        self.derivative(false)
    }

    fn derivative(&self, along_x: bool) -> Poly2 {
        let deg = self.degree().saturating_sub(1);
        let basis = self.basis.with_degree(deg);
        let mut out = vec![0.0; basis.dim()];
        let h = self.basis.diameter;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let (a, b) = monomial_exponents(i);
            if along_x && a > 0 {
                out[monomial_index(a - 1, b)] += c * a as f64 / h;
            } else if !along_x && b > 0 {
                out[monomial_index(a, b - 1)] += c * b as f64 / h;
            }
        }
        Poly2::new(basis, out)
    }
}

fn same_anchor(a: &ScaledMonomialBasis, b: &ScaledMonomialBasis) -> bool {
    a.centroid == b.centroid && a.diameter == b.diameter
}

/// Polynomial map `ξ -> (P(ξ), Q(ξ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap2 {
    pub p: Poly2,
    pub q: Poly2,
}

impl PolyMap2 {
    pub fn new(p: Poly2, q: Poly2) -> Self {
        Self { p, q }
    }

    pub fn eval(&self, xi: Point2) -> Point2 {
        Point2::new(self.p.eval(xi), self.q.eval(xi))
    }

    /// `[[∂P/∂ξ1, ∂P/∂ξ2], [∂Q/∂ξ1, ∂Q/∂ξ2]]` at `xi`.
    pub fn jacobian(&self, xi: Point2) -> [[f64; 2]; 2] {
        let basis = self.p.basis;
        let (gx, gy) = basis.eval_grad(xi);
        let dot = |c: &[f64], g: &[f64]| c.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
        [
            [dot(&self.p.coeffs, &gx), dot(&self.p.coeffs, &gy)],
            [dot(&self.q.coeffs, &gx), dot(&self.q.coeffs, &gy)],
        ]
    }

    pub fn det(&self, xi: Point2) -> f64 {
        let j = self.jacobian(xi);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Jacobian determinant as a polynomial of degree `2(l-1)`.
    pub fn det_poly(&self) -> Poly2 {
        self.p.dx().mul(&self.q.dy()).sub(&self.p.dy().mul(&self.q.dx()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(d: usize) -> ScaledMonomialBasis {
        ScaledMonomialBasis::new(Point2::new(0.3, 0.1), 0.7, d)
    }

    fn pseudo_random(d: usize, seed: f64) -> Poly2 {
        let b = basis(d);
        let coeffs = (0..b.dim()).map(|i| ((i as f64 + seed) * 1.37).sin()).collect();
        Poly2::new(b, coeffs)
    }

    #[test]
    fn product_evaluates_pointwise() {
        let p = pseudo_random(2, 0.5);
        let q = pseudo_random(3, 1.5);
        let pq = p.mul(&q);
        for pt in [Point2::new(0.0, 0.0), Point2::new(0.8, -0.4), Point2::new(0.2, 0.9)] {
            assert!((pq.eval(pt) - p.eval(pt) * q.eval(pt)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = pseudo_random(4, 0.2);
        let pt = Point2::new(0.41, 0.27);
        let e = 1e-6;
        let fdx = (p.eval(Point2::new(pt.x + e, pt.y)) - p.eval(Point2::new(pt.x - e, pt.y))) / (2.0 * e);
        let fdy = (p.eval(Point2::new(pt.x, pt.y + e)) - p.eval(Point2::new(pt.x, pt.y - e))) / (2.0 * e);
        assert!((p.dx().eval(pt) - fdx).abs() < 1e-6);
        assert!((p.dy().eval(pt) - fdy).abs() < 1e-6);
    }

    #[test]
    fn det_poly_matches_pointwise_det() {
        let m = PolyMap2::new(pseudo_random(2, 0.1), pseudo_random(2, 2.3));
        let dp = m.det_poly();
        assert_eq!(dp.degree(), 2);
        for pt in [Point2::new(0.1, 0.2), Point2::new(-0.3, 0.5)] {
            assert!((dp.eval(pt) - m.det(pt)).abs() < 1e-11);
        }
    }
}
