use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::sparse::{solve_sparse, CsrMatrix};
use super::{EllipticProblem, MethodError, PreparedMethod, SolutionFrame};
use crate::geometry::{monomial_dim, Point2};
use crate::vem_space::{edge_moments, DofLayout, VemFunction};

/// Local matrices of one element; rows are test functions.
#[derive(Debug, Clone)]
pub struct ElementSystem {
    pub dofs: Vec<usize>,
    pub diffusion: DMatrix<f64>,
    /// Skew-symmetric convection block.
    pub convection: DMatrix<f64>,
    pub reaction: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    pub load: DVector<f64>,
    /// Nodal average of `μ` before clamping at zero.
    pub mu_bar: f64,
}

impl ElementSystem {
    pub fn total(&self) -> DMatrix<f64> {
        &self.diffusion + &self.convection + &self.reaction + &self.stabilization
    }
}

/// Element matrices of `method` for `problem` on one cell.
pub fn element_system(
    method: &dyn PreparedMethod,
    problem: &EllipticProblem,
    layout: &DofLayout,
    cell: usize,
) -> Result<ElementSystem, MethodError> {
    let k = method.k();
    let proj = method.projectors(cell);
    let n = proj.ndof();
    let nk = monomial_dim(k);
    let nk1 = monomial_dim(k - 1);
    let pts = method.points(cell, method.assembly_degree())?;
    let np = pts.len();

    let mut mk = DMatrix::zeros(np, nk);
    let mut row = vec![0.0; nk];
    for (r, p) in pts.iter().enumerate() {
        proj.basis.eval_into(p.at, &mut row);
        for (j, v) in row.iter().enumerate() {
            mk[(r, j)] = *v;
        }
    }
    let phi = &mk * &proj.pi0;
    let mk1 = mk.columns(0, nk1);
    let gx = mk1 * &proj.pi1[0];
    let gy = mk1 * &proj.pi1[1];

    // physical gradients T Π¹ and weighted data, one row per point
    let mut tg = [DMatrix::zeros(np, n), DMatrix::zeros(np, n)];
    let mut wa = [[DVector::zeros(np), DVector::zeros(np)], [DVector::zeros(np), DVector::zeros(np)]];
    let mut wb = [DVector::zeros(np), DVector::zeros(np)];
    let mut wmu = DVector::zeros(np);
    let mut wf = DVector::zeros(np);
    for (r, p) in pts.iter().enumerate() {
        for d in 0..2 {
            let (t0, t1) = (p.t[(d, 0)], p.t[(d, 1)]);
            for j in 0..n {
                tg[d][(r, j)] = t0 * gx[(r, j)] + t1 * gy[(r, j)];
            }
        }
        let a = (problem.a)(p.x);
        for s in 0..2 {
            for t in 0..2 {
                wa[s][t][r] = p.weight * a[(s, t)];
            }
        }
        let b = (problem.b)(p.x);
        wb[0][r] = p.weight * b.x;
        wb[1][r] = p.weight * b.y;
        wmu[r] = p.weight * problem.mu(p.x);
        wf[r] = p.weight * (problem.f)(p.x);
    }

    let scale_rows = |m: &DMatrix<f64>, w: &DVector<f64>| {
        let mut out = m.clone();
        for (r, mut rr) in out.row_iter_mut().enumerate() {
            rr *= w[r];
        }
        out
    };

    let mut diffusion = DMatrix::zeros(n, n);
    for s in 0..2 {
        for t in 0..2 {
            diffusion += tg[s].transpose() * scale_rows(&tg[t], &wa[s][t]);
        }
    }
    diffusion = (&diffusion + diffusion.transpose()) * 0.5;

    // K_ij = ∫ φ_i b·∇φ_j
    let mut kmat = DMatrix::zeros(n, n);
    for d in 0..2 {
        kmat += phi.transpose() * scale_rows(&tg[d], &wb[d]);
    }
    let convection = (&kmat - kmat.transpose()) * 0.5;
    let reaction = phi.transpose() * scale_rows(&phi, &wmu);
    let reaction = (&reaction + reaction.transpose()) * 0.5;
    let load = phi.transpose() * wf;

    let verts = method.vertex_points(cell);
    let nvp = verts.len() as f64;
    let a_bar = verts.iter().map(|&x| 0.5 * (problem.a)(x).trace()).sum::<f64>() / nvp;
    let mu_bar = verts.iter().map(|&x| problem.mu(x)).sum::<f64>() / nvp;
    let h = proj.basis.diameter;
    let stabilization = proj.dofi_dofi() * (a_bar + h * h * mu_bar.max(0.0));

    Ok(ElementSystem {
        dofs: layout.cell_dofs(method.mesh(), cell),
        diffusion,
        convection,
        reaction,
        stabilization,
        load,
        mu_bar,
    })
}

/// Global system before boundary conditions.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub layout: DofLayout,
    pub matrix: CsrMatrix,
    pub convection: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Cells whose nodal `μ` average was negative and clamped in the
    /// stabilisation weight.
    pub clamped_cells: usize,
}

pub fn assemble(method: &dyn PreparedMethod, problem: &EllipticProblem) -> Result<DiscreteSystem, MethodError> {
    let mesh = method.mesh();
    let layout = DofLayout::new(mesh, method.k());
    let locals = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            element_system(method, problem, &layout, c)
        })
        .collect::<Result<Vec<_>, MethodError>>()?;
    let n = layout.total();
    let mut full = Vec::new();
    let mut conv = Vec::new();
    let mut rhs = vec![0.0; n];
    let mut clamped = 0;
    for es in &locals {
        let total = es.total();
        for (i, &gi) in es.dofs.iter().enumerate() {
            rhs[gi] += es.load[i];
            for (j, &gj) in es.dofs.iter().enumerate() {
                full.push((gi, gj, total[(i, j)]));
                conv.push((gi, gj, es.convection[(i, j)]));
            }
        }
        if es.mu_bar < 0.0 {
            clamped += 1;
        }
    }
    if clamped > 0 {
        log::warn!("{clamped} cells have negative nodal mean of c - div(b)/2; stabilisation weight clamped");
    }
    Ok(DiscreteSystem {
        layout,
        matrix: CsrMatrix::from_triplets(n, n, full),
        convection: CsrMatrix::from_triplets(n, n, conv),
        rhs,
        clamped_cells: clamped,
    })
}

/// DoFs of the boundary trace of `g`: values at mapped vertices and edge
/// moments along the method's boundary edges. Interior entries are zero.
pub fn boundary_values(method: &dyn PreparedMethod, g: &(dyn Fn(Point2) -> f64 + Sync)) -> Vec<f64> {
    let mesh = method.mesh();
    let k = method.k();
    let layout = DofLayout::new(mesh, k);
    let mut out = vec![0.0; layout.total()];
    let flags = mesh.boundary_vertex_flags();
    for c in 0..mesh.num_cells() {
        let cell = mesh.cell(c);
        let vp = method.vertex_points(c);
        for (i, &v) in cell.iter().enumerate() {
            if flags[v] {
                out[layout.vertex_dof(v)] = g(vp[i]);
            }
        }
        if k >= 2 {
            for (i, &e) in mesh.cell_edges(c).iter().enumerate() {
                if mesh.edges()[e].is_boundary() {
                    let m = edge_moments(g, |t| method.edge_point(c, i, t), k, k + 6);
                    for (j, val) in m.into_iter().enumerate() {
                        out[layout.edge_dof(e, j)] = val;
                    }
                }
            }
        }
    }
    out
}

/// System on the free DoFs after eliminating the prescribed boundary DoFs.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each reduced unknown.
    pub free: Vec<usize>,
    /// Full DoF vector holding the prescribed boundary values.
    pub prescribed: Vec<f64>,
}

pub fn apply_dirichlet(system: &DiscreteSystem, values: &[f64]) -> ReducedSystem {
    let n = system.layout.total();
    assert_eq!(values.len(), n);
    let mask = system.layout.boundary_mask();
    let mut index = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&d| !mask[d]).collect();
    for (r, &d) in free.iter().enumerate() {
        index[d] = r;
    }
    let mut rhs: Vec<f64> = free.iter().map(|&d| system.rhs[d]).collect();
    let mut t = Vec::new();
    for (i, j, v) in system.matrix.triplets() {
        let ri = index[i];
        if ri == usize::MAX {
            continue;
        }
        if mask[j] {
            rhs[ri] -= v * values[j];
        } else {
            t.push((ri, index[j], v));
        }
    }
    let mut prescribed = vec![0.0; n];
    for d in 0..n {
        if mask[d] {
            prescribed[d] = values[d];
        }
    }
    ReducedSystem {
        matrix: CsrMatrix::from_triplets(free.len(), free.len(), t),
        rhs,
        free,
        prescribed,
    }
}

/// Discrete solution with its provenance.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: VemFunction,
    pub frame: SolutionFrame,
    pub method: &'static str,
    pub k: usize,
    pub residual: f64,
}

pub fn solve(method: &dyn PreparedMethod, reduced: &ReducedSystem) -> Result<Solution, MethodError> {
    let rep = solve_sparse(&reduced.matrix, &reduced.rhs)?;
    let mut dofs = reduced.prescribed.clone();
    for (r, &d) in reduced.free.iter().enumerate() {
        dofs[d] = rep.x[r];
    }
    Ok(Solution {
        u: VemFunction { k: method.k(), dofs },
        frame: method.frame(),
        method: method.name(),
        k: method.k(),
        residual: rep.residual,
    })
}
