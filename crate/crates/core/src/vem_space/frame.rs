use nalgebra::{DMatrix, SymmetricEigen};

use super::trace::EdgeTrace;
use super::{local_dof_count, VemError};
use crate::geometry::{
    monomial_dim, monomial_exponents, monomial_index, GaussRule1D, Point2, ScaledMonomialBasis,
};

/// Quadrature node on an edge, in the canonical edge parameter.
#[derive(Debug, Clone, Copy)]
pub struct EdgeNode {
    pub t: f64,
    pub w: f64,
    pub pos: Point2,
    /// `dγ/dt` of the canonical parameterisation.
    pub tangent: Point2,
}

#[derive(Debug, Clone)]
pub struct FrameEdge {
    /// True when the canonical parameter runs against the CCW loop.
    pub reversed: bool,
    /// Distance between the edge endpoints.
    pub chord: f64,
    pub nodes: Vec<EdgeNode>,
}

impl FrameEdge {
    /// Samples a parameterised edge `t -> (γ(t), γ'(t))` with `n` Gauss points.
    pub fn sample(reversed: bool, n: usize, curve: impl Fn(f64) -> (Point2, Point2)) -> Self {
        let nodes = GaussRule1D::new(n)
            .unit_interval()
            .into_iter()
            .map(|(t, w)| {
                let (pos, tangent) = curve(t);
                EdgeNode { t, w, pos, tangent }
            })
            .collect();
        let chord = curve(0.0).0.dist(curve(1.0).0);
        Self { reversed, chord, nodes }
    }

    /// Outward `n dS / dt` at a node.
    pub fn normal(&self, node: &EdgeNode) -> Point2 {
        let n = node.tangent.rot_cw();
        if self.reversed {
            -n
        } else {
            n
        }
    }
}

/// Everything the projector construction needs to know about one element.
///
/// `element_*` describe the element the DoFs live on; `projection_*` the
/// region over which `Π⁰` and `Π¹` are L²-orthogonal. Both moment tables use
/// the anchor of `basis` and reach degree `2k`.
#[derive(Debug, Clone)]
pub struct ElementFrame {
    pub basis: ScaledMonomialBasis,
    pub vertices: Vec<Point2>,
    pub edges: Vec<FrameEdge>,
    pub element_measure: f64,
    pub element_moments: Vec<f64>,
    pub projection_measure: f64,
    pub projection_moments: Vec<f64>,
}

/// Gauss points per edge for degree-`k` traces on degree-`l` curves.
pub fn edge_points(k: usize, l: usize) -> usize {
    (k + k * l + 1).div_ceil(2).max(1)
}

impl ElementFrame {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Local DoF indices `[t=0 end, t=1 end, moments...]` of edge `e`.
    pub fn edge_dof_indices(&self, e: usize, k: usize) -> Vec<usize> {
        let nv = self.vertices.len();
        let (a, b) = (e, (e + 1) % nv);
        let (s, t) = if self.edges[e].reversed { (b, a) } else { (a, b) };
        let mut out = vec![s, t];
        out.extend((0..k - 1).map(|j| nv + e * (k - 1) + j));
        out
    }

    pub fn internal_dof_offset(&self, k: usize) -> usize {
        self.vertices.len() * k
    }
}

/// Projection matrices of one element, acting on local DoF vectors.
#[derive(Debug, Clone)]
pub struct ElementProjectors {
    pub k: usize,
    pub basis: ScaledMonomialBasis,
    pub pi_star: DMatrix<f64>,
    pub pi0: DMatrix<f64>,
    /// `Π¹_{k-1}` for the x- and y-derivatives.
    pub pi1: [DMatrix<f64>; 2],
    /// Mass matrix of `ℳ_k` over the projection region.
    pub mass: DMatrix<f64>,
    /// Column `α` holds the DoFs of `m_α`.
    pub dofs_of_monomials: DMatrix<f64>,
}

impl ElementProjectors {
    pub fn ndof(&self) -> usize {
        self.pi0.ncols()
    }

    /// `(I - D Π⁰)ᵀ (I - D Π⁰)`, the unweighted dofi-dofi stabilisation.
    pub fn dofi_dofi(&self) -> DMatrix<f64> {
        let n = self.ndof();
        let r = DMatrix::identity(n, n) - &self.dofs_of_monomials * &self.pi0;
        r.transpose() * r
    }
}

const COND_WARN: f64 = 1e12;

/// Builds `Π*` (= `Π^∇`), `Π⁰_k` and `Π¹_{k-1}` on a frame.
pub fn build_projectors(frame: &ElementFrame, k: usize) -> Result<ElementProjectors, VemError> {
    assert!(k >= 1);
    let nv = frame.vertices.len();
    let ndof = local_dof_count(nv, k);
    let nk = monomial_dim(k);
    let nk1 = monomial_dim(k - 1);
    let n_int = if k >= 2 { monomial_dim(k - 2) } else { 0 };
    let int0 = frame.internal_dof_offset(k);
    let basis = frame.basis.with_degree(k);
    let h = basis.diameter;
    let trace = EdgeTrace::new(k);
    let em = &frame.element_moments;
    let pm = &frame.projection_moments;
    assert!(em.len() >= monomial_dim(2 * k) && pm.len() >= monomial_dim(2 * k));

    // Stiffness of ℳ_k over the element.
    let mut g = DMatrix::zeros(nk, nk);
    for i in 0..nk {
        let (ai, bi) = monomial_exponents(i);
        for j in 0..nk {
            let (aj, bj) = monomial_exponents(j);
            let mut v = 0.0;
            if ai > 0 && aj > 0 {
                v += (ai * aj) as f64 * em[monomial_index(ai + aj - 2, bi + bj)];
            }
            if bi > 0 && bj > 0 {
                v += (bi * bj) as f64 * em[monomial_index(ai + aj, bi + bj - 2)];
            }
            g[(i, j)] = v / (h * h);
        }
    }

    let mut b = DMatrix::zeros(nk, ndof);
    // -∫_E v Δm_i through the internal moments
    for i in 0..nk {
        let (a, bb) = monomial_exponents(i);
        if a >= 2 {
            b[(i, int0 + monomial_index(a - 2, bb))] -= (a * (a - 1)) as f64 / (h * h) * frame.element_measure;
        }
        if bb >= 2 {
            b[(i, int0 + monomial_index(a, bb - 2))] -= (bb * (bb - 1)) as f64 / (h * h) * frame.element_measure;
        }
    }

    // Boundary terms: ∮ v ∂m_i/∂n for Π^∇, ∮ v m_α n for Π¹, chord-weighted
    // parameter mean for the kernel.
    let mut p0_mono = vec![0.0; nk];
    let mut p0_dofs = vec![0.0; ndof];
    let mut bnd = [DMatrix::zeros(nk1, ndof), DMatrix::zeros(nk1, ndof)];
    let mut m = vec![0.0; nk];
    for (e, edge) in frame.edges.iter().enumerate() {
        let ids = frame.edge_dof_indices(e, k);
        for node in &edge.nodes {
            let phi = trace.basis_values(node.t);
            let n = edge.normal(node);
            basis.eval_into(node.pos, &mut m);
            let (gx, gy) = basis.eval_grad(node.pos);
            for i in 0..nk {
                p0_mono[i] += edge.chord * node.w * m[i];
                let dn = node.w * (gx[i] * n.x + gy[i] * n.y);
                for (&d, &p) in ids.iter().zip(&phi) {
                    b[(i, d)] += dn * p;
                }
            }
            for (&d, &p) in ids.iter().zip(&phi) {
                p0_dofs[d] += edge.chord * node.w * p;
                for i in 0..nk1 {
                    bnd[0][(i, d)] += node.w * m[i] * n.x * p;
                    bnd[1][(i, d)] += node.w * m[i] * n.y * p;
                }
            }
        }
    }
    for j in 0..nk {
        g[(0, j)] = p0_mono[j];
    }
    for d in 0..ndof {
        b[(0, d)] = p0_dofs[d];
    }
    let pi_star = g
        .lu()
        .solve(&b)
        .ok_or_else(|| VemError::Singular("Π^∇ system".into()))?;

    let mut mass = DMatrix::zeros(nk, nk);
    for i in 0..nk {
        let (ai, bi) = monomial_exponents(i);
        for j in 0..nk {
            let (aj, bj) = monomial_exponents(j);
            mass[(i, j)] = pm[monomial_index(ai + aj, bi + bj)];
        }
    }
    check_conditioning(&mass);

    // Π⁰ = Π* + e with e ∈ ℙ_{k-2}. The low moments of e over the projection
    // region carry the part of the internal DoFs that Π* misses on the
    // element, so Π⁰ reproduces ℙ_k exactly.
    let mut pi0 = pi_star.clone();
    if n_int > 0 {
        let mut emass = DMatrix::zeros(n_int, nk);
        for i in 0..n_int {
            let (ai, bi) = monomial_exponents(i);
            for j in 0..nk {
                let (aj, bj) = monomial_exponents(j);
                emass[(i, j)] = em[monomial_index(ai + aj, bi + bj)];
            }
        }
        let ratio = frame.projection_measure / frame.element_measure;
        let mut rhs = -(&emass * &pi_star) * ratio;
        for a in 0..n_int {
            rhs[(a, int0 + a)] += frame.projection_measure;
        }
        let low = mass
            .view((0, 0), (n_int, n_int))
            .into_owned()
            .cholesky()
            .ok_or_else(|| VemError::Singular("mass matrix is not positive definite".into()))?;
        let e = low.solve(&rhs);
        let mut top = pi0.rows_mut(0, n_int);
        top += e;
    }

    let mass1 = mass.view((0, 0), (nk1, nk1)).into_owned();
    let chol1 = mass1
        .cholesky()
        .ok_or_else(|| VemError::Singular("vector mass matrix is not positive definite".into()))?;
    let mut pi1 = [DMatrix::zeros(nk1, ndof), DMatrix::zeros(nk1, ndof)];
    for (dir, out) in pi1.iter_mut().enumerate() {
        let mut rhs = bnd[dir].clone();
        for i in 0..nk1 {
            let (a, bb) = monomial_exponents(i);
            let (p, src) = if dir == 0 {
                (a, if a > 0 { Some(monomial_index(a - 1, bb)) } else { None })
            } else {
                (bb, if bb > 0 { Some(monomial_index(a, bb - 1)) } else { None })
            };
            // the interior term uses |E^π| dof_s for ∫ Π⁰v m_s, s ≤ k-2
            if let Some(s) = src {
                rhs[(i, int0 + s)] -= p as f64 / h * frame.projection_measure;
            }
        }
        *out = chol1.solve(&rhs);
    }

    let dofs_of_monomials = monomial_dofs(frame, k);
    Ok(ElementProjectors {
        k,
        basis,
        pi_star,
        pi0,
        pi1,
        mass,
        dofs_of_monomials,
    })
}

fn check_conditioning(mass: &DMatrix<f64>) {
    let ev = SymmetricEigen::new(mass.clone()).eigenvalues;
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e.abs())));
    if lo > 0.0 && hi / lo > COND_WARN {
        log::warn!("element mass matrix condition number {:e}", hi / lo);
    }
}

/// DoFs of every monomial of `ℳ_k` on the frame (one column each).
pub fn monomial_dofs(frame: &ElementFrame, k: usize) -> DMatrix<f64> {
    let nv = frame.vertices.len();
    let ndof = local_dof_count(nv, k);
    let nk = monomial_dim(k);
    let basis = frame.basis.with_degree(k);
    let int0 = frame.internal_dof_offset(k);
    let mut d = DMatrix::zeros(ndof, nk);
    let mut m = vec![0.0; nk];
    for (i, &p) in frame.vertices.iter().enumerate() {
        basis.eval_into(p, &mut m);
        for a in 0..nk {
            d[(i, a)] = m[a];
        }
    }
    for (e, edge) in frame.edges.iter().enumerate() {
        for node in &edge.nodes {
            basis.eval_into(node.pos, &mut m);
            let mut s = 1.0;
            for j in 0..k.saturating_sub(1) {
                for a in 0..nk {
                    d[(nv + e * (k - 1) + j, a)] += node.w * m[a] * s;
                }
                s *= node.t - 0.5;
            }
        }
    }
    if k >= 2 {
        for beta in 0..monomial_dim(k - 2) {
            let (ab, bb) = monomial_exponents(beta);
            for a in 0..nk {
                let (aa, ba) = monomial_exponents(a);
                d[(int0 + beta, a)] =
                    frame.element_moments[monomial_index(aa + ab, ba + bb)] / frame.element_measure;
            }
        }
    }
    d
}
