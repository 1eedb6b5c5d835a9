//! The three discretisations behind a common interface, chosen by name at
//! runtime: `reference` (reference IsoVEM), `physical` (physical IsoVEM) and
//! `curved` (curved VEM on the exact elements).

mod assembly;
mod curved;
mod physical;
mod reference;
pub mod sparse;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;

use crate::geometry::{GeometryError, Point2};
use crate::mapping::{DomainMap, MapError, VirtualMap};
use crate::mesh::PolygonalMesh;
use crate::vem_space::{ElementProjectors, VemError};

pub use assembly::{
    apply_dirichlet, assemble, boundary_values, element_system, solve, DiscreteSystem, ElementSystem,
    ReducedSystem, Solution,
};
pub use curved::CurvedVem;
pub use physical::PhysicalIsoVem;
pub use reference::ReferenceIsoVem;
pub use sparse::{solve_sparse, CsrMatrix, SolveError, SolveReport};

pub type ScalarField = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point2) -> Point2 + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(Point2) -> Matrix2<f64> + Send + Sync>;

/// `-∇·(a∇u) + b·∇u + c u = f`, with data defined on all of ℝ².
///
/// The convection term is discretised in skew form, so the reaction that
/// enters the bilinear form is `μ = c - ½∇·b`.
#[derive(Clone)]
pub struct EllipticProblem {
    pub a: MatrixField,
    pub b: VectorField,
    pub div_b: ScalarField,
    pub c: ScalarField,
    pub f: ScalarField,
    pub u: Option<ScalarField>,
    pub grad_u: Option<VectorField>,
}

impl fmt::Debug for EllipticProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticProblem")
            .field("has_exact_solution", &self.u.is_some())
            .finish_non_exhaustive()
    }
}

impl EllipticProblem {
    /// `-Δu = f`.
    pub fn poisson(f: ScalarField) -> Self {
        Self {
            a: Arc::new(|_| Matrix2::identity()),
            b: Arc::new(|_| Point2::new(0.0, 0.0)),
            div_b: Arc::new(|_| 0.0),
            c: Arc::new(|_| 0.0),
            f,
            u: None,
            grad_u: None,
        }
    }

    pub fn with_solution(mut self, u: ScalarField, grad_u: VectorField) -> Self {
        self.u = Some(u);
        self.grad_u = Some(grad_u);
        self
    }

    pub fn mu(&self, x: Point2) -> f64 {
        (self.c)(x) - 0.5 * (self.div_b)(x)
    }

    /// Checks ellipticity of `a` (fatal) and `μ ≥ 0` (counted) at `points`.
    pub fn check_data(&self, points: &[Point2]) -> Result<DataCheck, MethodError> {
        let mut negative_mu = 0;
        let mut min_mu = f64::INFINITY;
        for &x in points {
            let a = (self.a)(x);
            let lo = nalgebra::SymmetricEigen::new(a.symmetric_part()).eigenvalues.min();
            if lo <= 0.0 || (a - a.transpose()).amax() > 1e-12 * a.amax() {
                return Err(MethodError::Data(format!("diffusion is not SPD at ({}, {})", x.x, x.y)));
            }
            let mu = self.mu(x);
            min_mu = min_mu.min(mu);
            if mu < 0.0 {
                negative_mu += 1;
            }
        }
        Ok(DataCheck { negative_mu, min_mu })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataCheck {
    pub negative_mu: usize,
    pub min_mu: f64,
}

/// A quadrature point of an element integral.
///
/// Forms are evaluated as `Σ weight · F(data(x), Π⁰u(at), T Π¹u(at))`; error
/// norms compare `M ∇u(x)` with `T Π¹u_h(at)`.
#[derive(Debug, Clone, Copy)]
pub struct IntegrationPoint {
    /// Where the projections are evaluated.
    pub at: Point2,
    /// Physical point where the data are evaluated.
    pub x: Point2,
    pub weight: f64,
    /// Maps projected gradients to physical gradients.
    pub t: Matrix2<f64>,
    /// Maps exact physical gradients into the norm.
    pub m: Matrix2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionFrame {
    Reference,
    Physical,
}

#[derive(Debug, thiserror::Error)]
pub enum MethodError {
    #[error(transparent)]
    Vem(#[from] VemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("non-positive Jacobian determinant {det:e} in cell {cell}")]
    Jacobian { cell: usize, det: f64 },
    #[error("unknown method `{0}`")]
    Unknown(String),
    #[error("{0}")]
    Data(String),
    #[error("method `{0}` needs a virtual map")]
    MissingMap(&'static str),
}

/// Everything a method may draw on to discretise one mesh level.
#[derive(Clone)]
pub struct MethodContext {
    pub mesh: Arc<PolygonalMesh>,
    pub k: usize,
    /// Analytic map `F` of the reference domain.
    pub analytic: Arc<dyn DomainMap>,
    /// Virtual map `F_h`, required by the isoparametric methods.
    pub map: Option<Arc<VirtualMap>>,
    pub quad_bump: usize,
}

/// Default assembly quadrature degree on the reference cell.
pub fn assembly_degree(k: usize, l: usize, bump: usize) -> usize {
    2 * k + 4 * (l.max(1) - 1) + 4 + bump
}

/// A discretisation registered under a name.
pub trait Discretization: Send + Sync {
    fn name(&self) -> &'static str;
    fn frame(&self) -> SolutionFrame;
    fn prepare(&self, ctx: &MethodContext) -> Result<Box<dyn PreparedMethod>, MethodError>;
}

/// Per-element data of a discretisation on one mesh.
pub trait PreparedMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn frame(&self) -> SolutionFrame;
    fn k(&self) -> usize;
    fn mesh(&self) -> &PolygonalMesh;
    fn projectors(&self, cell: usize) -> &ElementProjectors;
    /// Images of the cell vertices in the physical domain.
    fn vertex_points(&self, cell: usize) -> &[Point2];
    /// Quadrature of an element integral, exact to `degree` on the reference cell.
    fn points(&self, cell: usize, degree: usize) -> Result<Vec<IntegrationPoint>, MethodError>;
    /// Physical point at canonical parameter `t` of local edge `edge`.
    fn edge_point(&self, cell: usize, edge: usize, t: f64) -> Point2;
    fn assembly_degree(&self) -> usize;
}

/// Canonical straight parameterisation of local edge `e` of a reference cell.
pub(crate) fn straight_edge(pts: &[Point2], gids: &[usize], e: usize, t: f64) -> Point2 {
    let n = pts.len();
    let (i, j) = (e, (e + 1) % n);
    let (s, f) = if gids[i] > gids[j] { (pts[j], pts[i]) } else { (pts[i], pts[j]) };
    s + (f - s) * t
}

/// Name-keyed registry of discretisations.
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Box<dyn Discretization>>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ReferenceIsoVem));
        r.register(Box::new(PhysicalIsoVem));
        r.register(Box::new(CurvedVem));
        r
    }
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, m: Box<dyn Discretization>) {
        self.methods.insert(m.name(), m);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Discretization, MethodError> {
        self.methods
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| MethodError::Unknown(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.methods.keys().copied()
    }
}
