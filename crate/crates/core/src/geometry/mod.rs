//! Points, scaled monomials, quadrature and exact polynomial integration
//! over straight polygons and over regions bounded by polynomial curves.

mod curve;
mod moments;
mod monomial;
mod poly;
pub mod quadrature;

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

pub use curve::{cell_area_by_boundary, curve_line_integral, CurveComponent, PolynomialCurve};
pub use moments::{boundary_moments, curved_moments, polygon_moments};
pub use monomial::{monomial_dim, monomial_exponents, monomial_index, ScaledMonomialBasis};
pub use poly::{Poly2, PolyMap2};
pub use quadrature::{polygon_rule, GaussRule1D, QuadPoint};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Clockwise rotation by 90 degrees: the outward normal of a CCW tangent.
    pub fn rot_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Signed area of a closed vertex loop (positive when counterclockwise).
pub fn signed_area(loop_pts: &[Point2]) -> f64 {
    let n = loop_pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += loop_pts[i].cross(loop_pts[(i + 1) % n]);
    }
    0.5 * acc
}

/// Area centroid of a simple polygon.
pub fn polygon_centroid(loop_pts: &[Point2]) -> Point2 {
    let n = loop_pts.len();
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = loop_pts[i];
        let q = loop_pts[(i + 1) % n];
        let w = p.cross(q);
        a += w;
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Point2::new(cx / (3.0 * a), cy / (3.0 * a))
}

/// Largest pairwise distance within a point set.
pub fn diameter(pts: &[Point2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(p.dist(*q));
        }
    }
    d
}

/// Errors raised by geometric computations.
#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate polygon (signed area {0:e})")]
    DegeneratePolygon(f64),
    #[error("map Jacobian determinant {det:e} is not positive at {at:?}; refine the mesh")]
    NonPositiveJacobian { det: f64, at: Point2 },
    #[error("boundary loop is open: endpoint mismatch {0:e}")]
    OpenLoop(f64),
    #[error("singular local system: {0}")]
    Singular(String),
}
