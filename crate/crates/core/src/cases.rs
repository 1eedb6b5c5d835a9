//! Built-in test problems: a quarter annulus, a smoothly distorted plane
//! region, and the unit square under the identity map.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::geometry::Point2;
use crate::mapping::{DomainMap, IdentityMap};
use crate::methods::EllipticProblem;

/// `ξ -> (ξ₁+1)(cos(πξ₂/2), sin(πξ₂/2))`, the quarter annulus `1 < r < 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnnulusMap;

impl DomainMap for AnnulusMap {
    fn eval(&self, xi: Point2) -> Point2 {
        let (s, c) = (FRAC_PI_2 * xi.y).sin_cos();
        Point2::new((xi.x + 1.0) * c, (xi.x + 1.0) * s)
    }

    fn jacobian(&self, xi: Point2) -> [[f64; 2]; 2] {
        let (s, c) = (FRAC_PI_2 * xi.y).sin_cos();
        let r = xi.x + 1.0;
        [[c, -FRAC_PI_2 * r * s], [s, FRAC_PI_2 * r * c]]
    }
}

/// `ξ -> (tanh(2ξ₁-1) e^{ξ₂}, tanh(2ξ₂-1) e^{ξ₁})`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlaneMap;

impl DomainMap for PlaneMap {
    fn eval(&self, xi: Point2) -> Point2 {
        Point2::new((2.0 * xi.x - 1.0).tanh() * xi.y.exp(), (2.0 * xi.y - 1.0).tanh() * xi.x.exp())
    }

    fn jacobian(&self, xi: Point2) -> [[f64; 2]; 2] {
        let (t1, t2) = ((2.0 * xi.x - 1.0).tanh(), (2.0 * xi.y - 1.0).tanh());
        let (e1, e2) = (xi.x.exp(), xi.y.exp());
        [[2.0 * (1.0 - t1 * t1) * e2, t1 * e2], [t2 * e1, 2.0 * (1.0 - t2 * t2) * e1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Annulus,
    Plane,
    Identity,
}

impl FromStr for CaseKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "annulus" => Ok(Self::Annulus),
            "plane" => Ok(Self::Plane),
            "identity" => Ok(Self::Identity),
            other => Err(format!("unknown case `{other}` (expected annulus, plane or identity)")),
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Annulus => "annulus",
            Self::Plane => "plane",
            Self::Identity => "identity",
        })
    }
}

/// A domain map with a problem posed on its image.
#[derive(Clone)]
pub struct TestCase {
    pub kind: CaseKind,
    pub map: Arc<dyn DomainMap>,
    pub problem: EllipticProblem,
}

impl TestCase {
    pub fn new(kind: CaseKind) -> Self {
        match kind {
            CaseKind::Annulus => annulus(),
            CaseKind::Plane => plane(),
            CaseKind::Identity => identity(),
        }
    }
}

/// `a = 1`, `b = (-y, x)`, `c = 0`, `u = ln r / ln 2`.
pub fn annulus() -> TestCase {
    let problem = EllipticProblem {
        a: Arc::new(|_| Matrix2::identity()),
        b: Arc::new(|x| Point2::new(-x.y, x.x)),
        div_b: Arc::new(|_| 0.0),
        c: Arc::new(|_| 0.0),
        f: Arc::new(|_| 0.0),
        u: None,
        grad_u: None,
    }
    .with_solution(
        Arc::new(|x| 0.5 * x.dot(x).ln() / LN_2),
        Arc::new(|x| x * (1.0 / (x.dot(x) * LN_2))),
    );
    TestCase {
        kind: CaseKind::Annulus,
        map: Arc::new(AnnulusMap),
        problem,
    }
}

pub fn plane_forcing(p: Point2) -> f64 {
    let (x, y) = (p.x, p.y);
    let (sx, cx) = x.sin_cos();
    let (sxy, cxy) = (x * y).sin_cos();
    let (x2, y2) = (x * x, y * y);
    sx * cxy * (x2 * x2 - 2.0 * x2 * y2 + 2.0 * x2 + y2 * y2 + y2 * y + 2.0 * y2 + 3.0)
        + 2.0 * x * cx * cxy
        + 2.0 * y * (y2 - x2 + 1.0) * cx * sxy
        - 6.0 * x * y * sx * sxy
}

/// `a = [[y²+1, -xy], [-xy, x²+1]]`, `b = (x, y)`, `c = x²+y³+2`,
/// `u = cos(xy) sin(x)`.
pub fn plane() -> TestCase {
    let problem = EllipticProblem {
        a: Arc::new(|p| Matrix2::new(p.y * p.y + 1.0, -p.x * p.y, -p.x * p.y, p.x * p.x + 1.0)),
        b: Arc::new(|p| p),
        div_b: Arc::new(|_| 2.0),
        c: Arc::new(|p| p.x * p.x + p.y.powi(3) + 2.0),
        f: Arc::new(plane_forcing),
        u: None,
        grad_u: None,
    }
    .with_solution(
        Arc::new(|p| (p.x * p.y).cos() * p.x.sin()),
        Arc::new(|p| {
            let (sx, cx) = p.x.sin_cos();
            let (sxy, cxy) = (p.x * p.y).sin_cos();
            Point2::new(cxy * cx - p.y * sxy * sx, -p.x * sxy * sx)
        }),
    );
    TestCase {
        kind: CaseKind::Plane,
        map: Arc::new(PlaneMap),
        problem,
    }
}

/// Poisson on the unit square with `u = sin(πx) e^y`.
pub fn identity() -> TestCase {
    let problem = EllipticProblem::poisson(Arc::new(|p| (PI * PI - 1.0) * (PI * p.x).sin() * p.y.exp())).with_solution(
        Arc::new(|p| (PI * p.x).sin() * p.y.exp()),
        Arc::new(|p| Point2::new(PI * (PI * p.x).cos() * p.y.exp(), (PI * p.x).sin() * p.y.exp())),
    );
    TestCase {
        kind: CaseKind::Identity,
        map: Arc::new(IdentityMap),
        problem,
    }
}
