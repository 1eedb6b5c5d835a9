//! Enhanced C⁰ virtual element space of degree `k`: DoF layout, projector
//! construction and interpolation of analytic functions.

mod frame;
mod trace;

use crate::geometry::{
    diameter, monomial_dim, polygon_centroid, polygon_moments, polygon_rule, GaussRule1D, GeometryError,
    Point2, ScaledMonomialBasis,
};
use crate::mesh::PolygonalMesh;

pub use frame::{
    build_projectors, edge_points, monomial_dofs, EdgeNode, ElementFrame, ElementProjectors, FrameEdge,
};
pub use trace::{centered_moment, EdgeTrace};

#[derive(Debug, thiserror::Error)]
pub enum VemError {
    #[error("singular local system: {0}")]
    Singular(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Local DoF count of an `nv`-gon: vertices, `k-1` moments per edge and the
/// internal moments against `ℳ_{k-2}`.
pub fn local_dof_count(nv: usize, k: usize) -> usize {
    nv * k + if k >= 2 { monomial_dim(k - 2) } else { 0 }
}

/// Global numbering: vertex values, then edge moments, then internal moments.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub k: usize,
    n_vertices: usize,
    n_edges: usize,
    n_internal: usize,
    n_cells: usize,
    boundary: Vec<bool>,
}

impl DofLayout {
    pub fn new(mesh: &PolygonalMesh, k: usize) -> Self {
        assert!(k >= 1, "VEM degree must be at least 1");
        let n_internal = if k >= 2 { monomial_dim(k - 2) } else { 0 };
        let mut layout = Self {
            k,
            n_vertices: mesh.num_vertices(),
            n_edges: mesh.num_edges(),
            n_internal,
            n_cells: mesh.num_cells(),
            boundary: Vec::new(),
        };
        let mut boundary = vec![false; layout.total()];
        for (v, &b) in mesh.boundary_vertex_flags().iter().enumerate() {
            boundary[v] = b;
        }
        for (e, edge) in mesh.edges().iter().enumerate() {
            if edge.is_boundary() {
                for j in 0..k - 1 {
                    boundary[layout.edge_dof(e, j)] = true;
                }
            }
        }
        layout.boundary = boundary;
        layout
    }

    pub fn total(&self) -> usize {
        self.n_vertices + self.n_edges * (self.k - 1) + self.n_cells * self.n_internal
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        v
    }

    pub fn edge_dof(&self, e: usize, j: usize) -> usize {
        self.n_vertices + e * (self.k - 1) + j
    }

    pub fn internal_dof(&self, c: usize, a: usize) -> usize {
        self.n_vertices + self.n_edges * (self.k - 1) + c * self.n_internal + a
    }

    pub fn is_boundary(&self, d: usize) -> bool {
        self.boundary[d]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Global indices of the local DoFs of cell `c`, in local order.
    pub fn cell_dofs(&self, mesh: &PolygonalMesh, c: usize) -> Vec<usize> {
        let cell = mesh.cell(c);
        let mut out: Vec<usize> = cell.iter().map(|&v| self.vertex_dof(v)).collect();
        for &e in mesh.cell_edges(c) {
            out.extend((0..self.k - 1).map(|j| self.edge_dof(e, j)));
        }
        out.extend((0..self.n_internal).map(|a| self.internal_dof(c, a)));
        out
    }
}

/// A global DoF vector of the degree-`k` space.
#[derive(Debug, Clone, PartialEq)]
pub struct VemFunction {
    pub k: usize,
    pub dofs: Vec<f64>,
}

impl VemFunction {
    pub fn local(&self, ids: &[usize]) -> Vec<f64> {
        ids.iter().map(|&i| self.dofs[i]).collect()
    }
}

/// Monomial anchor of a straight cell: area centroid and vertex diameter.
pub fn straight_basis(pts: &[Point2], degree: usize) -> ScaledMonomialBasis {
    ScaledMonomialBasis::new(polygon_centroid(pts), diameter(pts), degree)
}

/// Frame of a straight polygonal cell; `gids` orient the edges canonically.
pub fn straight_frame(pts: &[Point2], gids: &[usize], k: usize) -> Result<ElementFrame, VemError> {
    let basis = straight_basis(pts, 2 * k);
    let moments = polygon_moments(pts, &basis, 2 * k)?;
    let n = pts.len();
    let edges = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let reversed = gids[i] > gids[j];
            let (s, e) = if reversed { (pts[j], pts[i]) } else { (pts[i], pts[j]) };
            FrameEdge::sample(reversed, edge_points(k, 1), |t| (s + (e - s) * t, e - s))
        })
        .collect();
    Ok(ElementFrame {
        basis,
        vertices: pts.to_vec(),
        edges,
        element_measure: moments[0],
        element_moments: moments.clone(),
        projection_measure: moments[0],
        projection_moments: moments,
    })
}

/// `∫₀¹ g(γ(t)) (t - ½)^j dt` for `j < k-1`.
pub fn edge_moments(g: impl Fn(Point2) -> f64, curve: impl Fn(f64) -> Point2, k: usize, n_gauss: usize) -> Vec<f64> {
    let mut out = vec![0.0; k.saturating_sub(1)];
    for (t, w) in GaussRule1D::new(n_gauss).unit_interval() {
        let v = w * g(curve(t));
        let mut s = 1.0;
        for o in out.iter_mut() {
            *o += v * s;
            s *= t - 0.5;
        }
    }
    out
}

/// VEM interpolant of `g` on a straight mesh: vertex values, canonical edge
/// moments and internal moments by high-order quadrature.
pub fn interpolate(g: impl Fn(Point2) -> f64 + Sync, mesh: &PolygonalMesh, k: usize) -> VemFunction {
    let layout = DofLayout::new(mesh, k);
    let mut dofs = vec![0.0; layout.total()];
    let v = mesh.vertices();
    for (i, &p) in v.iter().enumerate() {
        dofs[layout.vertex_dof(i)] = g(p);
    }
    if k >= 2 {
        for (e, edge) in mesh.edges().iter().enumerate() {
            let [a, b] = edge.canonical();
            let (pa, pb) = (v[a], v[b]);
            let m = edge_moments(&g, |t| pa + (pb - pa) * t, k, k + 6);
            for (j, val) in m.into_iter().enumerate() {
                dofs[layout.edge_dof(e, j)] = val;
            }
        }
        let n_int = monomial_dim(k - 2);
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            let basis = straight_basis(&pts, k - 2);
            let mut acc = vec![0.0; n_int];
            let mut m = vec![0.0; n_int];
            let mut area = 0.0;
            for q in polygon_rule(&pts, 2 * k + 8) {
                basis.eval_into(q.point, &mut m);
                let gv = g(q.point) * q.weight;
                area += q.weight;
                for (a, mv) in acc.iter_mut().zip(&m) {
                    *a += gv * mv;
                }
            }
            for (a, val) in acc.into_iter().enumerate() {
                dofs[layout.internal_dof(c, a)] = val / area;
            }
        }
    }
    VemFunction { k, dofs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::mesh::{generate_structured, StructuredKind};

    fn unit_square_frame(k: usize) -> ElementFrame {
        let pts = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        straight_frame(&pts, &[0, 1, 2, 3], k).unwrap()
    }

    #[test]
    fn dof_counts() {
        let one = generate_structured(StructuredKind::Quads, 1, 0).unwrap();
        let l1 = DofLayout::new(&one, 1);
        assert_eq!((l1.total(), l1.num_boundary()), (4, 4));
        let l2 = DofLayout::new(&one, 2);
        assert_eq!((l2.total(), l2.num_boundary()), (9, 8));
        let two = generate_structured(StructuredKind::Quads, 2, 0).unwrap();
        assert_eq!(DofLayout::new(&two, 1).total(), 9);
        assert_eq!(local_dof_count(5, 3), 5 + 10 + 3);
    }

    #[test]
    fn hat_function_mean_is_quarter() {
        let f = unit_square_frame(1);
        let p = build_projectors(&f, 1).unwrap();
        let v = nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let c = &p.pi0 * &v;
        // Π⁰ of the hat is affine for k = 1; its mean is its centroid value
        assert!((c[0] - 0.25).abs() < 1e-14);
        // the affine Π^∇ of the hat: least-squares fit through the boundary data
        let s = &p.pi_star * &v;
        let h = 2f64.sqrt();
        assert!((s[0] - 0.25).abs() < 1e-14);
        assert!((s[1] + 0.5 * h).abs() < 1e-14 && (s[2] + 0.5 * h).abs() < 1e-14);
    }

    #[test]
    fn constants_project_to_constants() {
        for k in 1..=3 {
            let f = unit_square_frame(k);
            let p = build_projectors(&f, k).unwrap();
            let ones = &p.dofs_of_monomials.column(0).into_owned();
            let c0 = &p.pi0 * ones;
            let g = &p.pi1[0] * ones;
            assert!((c0[0] - 1.0).abs() < 1e-13);
            assert!(c0.iter().skip(1).all(|x| x.abs() < 1e-13));
            assert!(g.iter().all(|x| x.abs() < 1e-13));
        }
    }

    #[test]
    fn interpolant_of_polynomial_matches_monomial_dofs() {
        let mesh = generate_structured(StructuredKind::PerturbedQuads, 3, 1).unwrap();
        let k = 3;
        let layout = DofLayout::new(&mesh, k);
        let g = |p: Point2| 1.0 + p.x - 2.0 * p.y * p.y + p.x * p.x * p.y;
        let vi = interpolate(g, &mesh, k);
        for c in 0..mesh.num_cells() {
            let pts = mesh.cell_points(c);
            let f = straight_frame(&pts, mesh.cell(c), k).unwrap();
            let p = build_projectors(&f, k).unwrap();
            let local = nalgebra::DVector::from_vec(vi.local(&layout.cell_dofs(&mesh, c)));
            let coef = &p.pi0 * &local;
            for q in [pts[0], pts[2], polygon_centroid(&pts)] {
                let val: f64 = p.basis.eval(q).iter().zip(coef.iter()).map(|(a, b)| a * b).sum();
                assert!((val - g(q)).abs() < 1e-12);
            }
        }
    }
}
