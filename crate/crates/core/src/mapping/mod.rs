//! The virtual element map `F_h`, its projected Jacobian, and the physical
//! and projected elements it induces.

mod file;

use nalgebra::{DVector, Matrix2};
use rayon::prelude::*;

use crate::geometry::{
    cell_area_by_boundary, curved_moments, polygon_rule, GeometryError, Point2, Poly2, PolyMap2, PolynomialCurve,
};
use crate::mesh::PolygonalMesh;
use crate::vem_space::{
    build_projectors, interpolate, straight_frame, DofLayout, EdgeTrace, ElementProjectors, VemError, VemFunction,
};

pub use file::{load_map, parse_map, write_map};

/// An analytic map from the reference square to the physical domain.
pub trait DomainMap: Send + Sync {
    fn eval(&self, xi: Point2) -> Point2;
    /// `[[∂x/∂ξ1, ∂x/∂ξ2], [∂y/∂ξ1, ∂y/∂ξ2]]`.
    fn jacobian(&self, xi: Point2) -> [[f64; 2]; 2];

    fn det(&self, xi: Point2) -> f64 {
        let j = self.jacobian(xi);
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityMap;

impl DomainMap for IdentityMap {
    fn eval(&self, xi: Point2) -> Point2 {
        xi
    }
    fn jacobian(&self, _: Point2) -> [[f64; 2]; 2] {
        [[1.0, 0.0], [0.0, 1.0]]
    }
}

/// `ξ -> A ξ + b`.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    pub a: [[f64; 2]; 2],
    pub b: Point2,
}

impl DomainMap for AffineMap {
    fn eval(&self, xi: Point2) -> Point2 {
        Point2::new(
            self.a[0][0] * xi.x + self.a[0][1] * xi.y + self.b.x,
            self.a[1][0] * xi.x + self.a[1][1] * xi.y + self.b.y,
        )
    }
    fn jacobian(&self, _: Point2) -> [[f64; 2]; 2] {
        self.a
    }
}

pub fn to_matrix(j: [[f64; 2]; 2]) -> Matrix2<f64> {
    Matrix2::new(j[0][0], j[0][1], j[1][0], j[1][1])
}

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error(transparent)]
    Vem(#[from] VemError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("map file error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("map does not fit the mesh: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    Interpolated,
    External,
}

/// `F_h ∈ [V_h^l]²` given by the DoF vectors of its two components.
#[derive(Debug, Clone)]
pub struct VirtualMap {
    pub l: usize,
    pub x: VemFunction,
    pub y: VemFunction,
    pub source: MapSource,
}

impl VirtualMap {
    pub fn vertex(&self, v: usize) -> Point2 {
        Point2::new(self.x.dofs[v], self.y.dofs[v])
    }
}

/// Componentwise VEM interpolant of an analytic map.
pub fn interpolate_map(f: &dyn DomainMap, mesh: &PolygonalMesh, l: usize) -> VirtualMap {
    VirtualMap {
        l,
        x: interpolate(|p| f.eval(p).x, mesh, l),
        y: interpolate(|p| f.eval(p).y, mesh, l),
        source: MapSource::Interpolated,
    }
}

/// `J_{F,h} = Π¹_{l-1} F_h` on one reference cell, with determinant and
/// cofactor matrix as exact polynomials.
#[derive(Debug, Clone)]
pub struct ProjectedJacobian {
    pub j: [[Poly2; 2]; 2],
    /// `det J`, degree `2(l-1)`.
    pub det: Poly2,
    /// `C` with `J Cᵀ = det·I`.
    pub cofactor: [[Poly2; 2]; 2],
}

impl ProjectedJacobian {
    pub fn eval(&self, xi: Point2) -> Matrix2<f64> {
        Matrix2::new(
            self.j[0][0].eval(xi),
            self.j[0][1].eval(xi),
            self.j[1][0].eval(xi),
            self.j[1][1].eval(xi),
        )
    }

    pub fn det_at(&self, xi: Point2) -> f64 {
        self.det.eval(xi)
    }

    /// Largest coefficient of `J Cᵀ - det·I`.
    pub fn cofactor_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let mut p = self.j[r][0].mul(&self.cofactor[c][0]).add(&self.j[r][1].mul(&self.cofactor[c][1]));
                if r == c {
                    p = p.sub(&self.det);
                }
                worst = p.coeffs.iter().fold(worst, |w, x| w.max(x.abs()));
            }
        }
        worst
    }
}

fn local_map_dofs(map: &VirtualMap, ids: &[usize]) -> (DVector<f64>, DVector<f64>) {
    (DVector::from_vec(map.x.local(ids)), DVector::from_vec(map.y.local(ids)))
}

fn poly_of(proj: &ElementProjectors, m: &nalgebra::DMatrix<f64>, v: &DVector<f64>, degree: usize) -> Poly2 {
    let c = m * v;
    Poly2::new(proj.basis.with_degree(degree), c.iter().copied().collect())
}

/// Projected Jacobian from the cell's degree-`l` projectors and local map DoFs.
pub fn projected_jacobian(map: &VirtualMap, proj_l: &ElementProjectors, ids: &[usize]) -> ProjectedJacobian {
    let l = map.l;
    let (fx, fy) = local_map_dofs(map, ids);
    let j00 = poly_of(proj_l, &proj_l.pi1[0], &fx, l - 1);
    let j01 = poly_of(proj_l, &proj_l.pi1[1], &fx, l - 1);
    let j10 = poly_of(proj_l, &proj_l.pi1[0], &fy, l - 1);
    let j11 = poly_of(proj_l, &proj_l.pi1[1], &fy, l - 1);
    let det = j00.mul(&j11).sub(&j01.mul(&j10));
    let cofactor = [
        [j11.clone(), j10.scale(-1.0)],
        [j01.scale(-1.0), j00.clone()],
    ];
    ProjectedJacobian {
        j: [[j00, j01], [j10, j11]],
        det,
        cofactor,
    }
}

/// `E_h = F_h(Ê)` through its edge traces, and `E_h^π = Π⁰_l F_h(Ê)`.
#[derive(Debug, Clone)]
pub struct PhysicalElement {
    pub reference: Vec<Point2>,
    pub vertices: Vec<Point2>,
    /// Edge `i` joins local vertices `i` and `i+1`; each curve uses the
    /// canonical edge parameter.
    pub edges: Vec<PolynomialCurve>,
    pub reversed: Vec<bool>,
    pub projected_map: PolyMap2,
}

impl PhysicalElement {
    /// Edge curves oriented along the CCW loop.
    pub fn ccw_loop(&self) -> Vec<PolynomialCurve> {
        self.edges
            .iter()
            .zip(&self.reversed)
            .map(|(c, &r)| if r { c.reversed() } else { c.clone() })
            .collect()
    }

    pub fn area(&self) -> Result<f64, GeometryError> {
        cell_area_by_boundary(&self.ccw_loop())
    }

    pub fn projected_area(&self) -> Result<f64, GeometryError> {
        let basis = self.projected_map.p.basis.with_degree(0);
        Ok(curved_moments(&self.reference, &self.projected_map, &basis, 0)?[0])
    }
}

/// Builds the physical element of a cell from its degree-`l` projectors.
pub fn physical_element(
    map: &VirtualMap,
    mesh: &PolygonalMesh,
    layout: &DofLayout,
    cell: usize,
    proj_l: &ElementProjectors,
) -> PhysicalElement {
    let l = map.l;
    let ids = layout.cell_dofs(mesh, cell);
    let (fx, fy) = local_map_dofs(map, &ids);
    let p = poly_of(proj_l, &proj_l.pi0, &fx, l);
    let q = poly_of(proj_l, &proj_l.pi0, &fy, l);
    let trace = EdgeTrace::new(l);
    let verts = mesh.cell(cell);
    let n = verts.len();
    let mut edges = Vec::with_capacity(n);
    let mut reversed = Vec::with_capacity(n);
    for (i, &e) in mesh.cell_edges(cell).iter().enumerate() {
        let [a, b] = mesh.edges()[e].canonical();
        let mut dx = vec![map.x.dofs[a], map.x.dofs[b]];
        let mut dy = vec![map.y.dofs[a], map.y.dofs[b]];
        for j in 0..l - 1 {
            dx.push(map.x.dofs[layout.edge_dof(e, j)]);
            dy.push(map.y.dofs[layout.edge_dof(e, j)]);
        }
        edges.push(PolynomialCurve::from_centered(&trace.coefficients(&dx), &trace.coefficients(&dy)));
        reversed.push(verts[i] > verts[(i + 1) % n]);
    }
    PhysicalElement {
        reference: mesh.cell_points(cell),
        vertices: verts.iter().map(|&v| map.vertex(v)).collect(),
        edges,
        reversed,
        projected_map: PolyMap2::new(p, q),
    }
}

pub const CONTINUITY_TOL: f64 = 1e-12;

/// Edge curves must start and end at the mapped vertices.
pub fn check_edge_continuity(el: &PhysicalElement) -> Result<(), MapError> {
    let n = el.vertices.len();
    for (i, c) in el.ccw_loop().iter().enumerate() {
        let gap = c.start().dist(el.vertices[i]).max(c.end().dist(el.vertices[(i + 1) % n]));
        if gap > CONTINUITY_TOL * (1.0 + el.vertices[i].norm()) {
            return Err(MapError::Mismatch(format!("edge curve {i} misses its endpoint by {gap:e}")));
        }
    }
    Ok(())
}

/// Per-cell geometric data of a virtual map.
#[derive(Debug, Clone)]
pub struct MappedCell {
    pub projectors: ElementProjectors,
    pub jacobian: ProjectedJacobian,
    pub physical: PhysicalElement,
}

/// Degree-`l` reference projectors, projected Jacobians and physical
/// elements for all cells.
pub fn map_cells(mesh: &PolygonalMesh, map: &VirtualMap) -> Result<Vec<MappedCell>, MapError> {
    let layout = DofLayout::new(mesh, map.l);
    if layout.total() != map.x.dofs.len() || layout.total() != map.y.dofs.len() {
        return Err(MapError::Mismatch(format!(
            "expected {} DoFs per component, found {}",
            layout.total(),
            map.x.dofs.len()
        )));
    }
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let pts = mesh.cell_points(c);
            let frame = straight_frame(&pts, mesh.cell(c), map.l)?;
            let projectors = build_projectors(&frame, map.l)?;
            let ids = layout.cell_dofs(mesh, c);
            let jacobian = projected_jacobian(map, &projectors, &ids);
            let physical = physical_element(map, mesh, &layout, c, &projectors);
            check_edge_continuity(&physical)?;
            Ok(MappedCell {
                projectors,
                jacobian,
                physical,
            })
        })
        .collect()
}

/// Errors of `Π⁰_l F_h` against the analytic map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapAccuracy {
    pub l2: f64,
    /// Broken H¹ seminorm.
    pub h1: f64,
}

pub fn map_accuracy_probe(f: &dyn DomainMap, mesh: &PolygonalMesh, cells: &[MappedCell]) -> MapAccuracy {
    let (l2, h1) = cells
        .par_iter()
        .enumerate()
        .map(|(c, mc)| {
            let pm = &mc.physical.projected_map;
            let l = pm.p.degree();
            let mut acc = (0.0, 0.0);
            for q in polygon_rule(&mesh.cell_points(c), 2 * l + 8) {
                let d = f.eval(q.point) - pm.eval(q.point);
                let jf = f.jacobian(q.point);
                let jp = pm.jacobian(q.point);
                let mut g = 0.0;
                for r in 0..2 {
                    for s in 0..2 {
                        g += (jf[r][s] - jp[r][s]).powi(2);
                    }
                }
                acc.0 += q.weight * d.dot(d);
                acc.1 += q.weight * g;
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    MapAccuracy {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
    }
}
