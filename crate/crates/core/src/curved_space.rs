//! Projectors on curved elements: the approximate projectors of the
//! physical IsoVEM on `E_h` / `E_h^π`, and exact-geometry projectors on
//! `F(Ê)` for the curved VEM baseline.

use crate::geometry::{
    boundary_moments, curved_moments, monomial_dim, polygon_rule, GeometryError, Point2, ScaledMonomialBasis,
};
use crate::mapping::{DomainMap, PhysicalElement};
use crate::vem_space::{build_projectors, edge_points, ElementFrame, ElementProjectors, FrameEdge, VemError};

/// Centroid from first-order moments taken about a provisional anchor.
fn centroid_from(anchor: &ScaledMonomialBasis, m: &[f64]) -> Point2 {
    let h = anchor.diameter;
    anchor.centroid + Point2::new(m[1], m[2]) * (h / m[0])
}

fn point_cloud_diameter(edges: &[FrameEdge], vertices: &[Point2]) -> f64 {
    let pts: Vec<Point2> = vertices
        .iter()
        .copied()
        .chain(edges.iter().flat_map(|e| e.nodes.iter().map(|n| n.pos)))
        .collect();
    let mut d: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            d = d.max(p.dist(*q));
        }
    }
    d
}

fn provisional(vertices: &[Point2]) -> ScaledMonomialBasis {
    let n = vertices.len() as f64;
    let c = vertices.iter().fold(Point2::default(), |a, &p| a + p) * (1.0 / n);
    ScaledMonomialBasis::new(c, crate::geometry::diameter(vertices), 1)
}

/// Monomial moments up to `degree` over `E_h` (by Green's theorem on the
/// edge curves) and over `E_h^π` (by pullback through the projected map).
pub fn curved_monomial_moments(
    el: &PhysicalElement,
    basis: &ScaledMonomialBasis,
    degree: usize,
) -> Result<(Vec<f64>, Vec<f64>), GeometryError> {
    let b = basis.with_degree(degree);
    let on_element = boundary_moments(&el.ccw_loop(), &b, degree)?;
    let on_projection = curved_moments(&el.reference, &el.projected_map, &b, degree)?;
    Ok((on_element, on_projection))
}

/// Frame of the virtual curved element `E_h` for degree-`k` projectors.
pub fn physical_frame(el: &PhysicalElement, k: usize) -> Result<ElementFrame, VemError> {
    let l = el.edges.iter().map(|c| c.degree()).max().unwrap_or(1).max(1);
    let loop_ = el.ccw_loop();
    let tmp = provisional(&el.vertices);
    let m1 = boundary_moments(&loop_, &tmp, 1)?;
    if m1[0] <= 0.0 {
        return Err(GeometryError::DegeneratePolygon(m1[0]).into());
    }
    let edges: Vec<FrameEdge> = el
        .edges
        .iter()
        .zip(&el.reversed)
        .map(|(c, &r)| FrameEdge::sample(r, edge_points(k, l), |t| (c.eval(t), c.deriv(t))))
        .collect();
    let basis = ScaledMonomialBasis::new(centroid_from(&tmp, &m1), point_cloud_diameter(&edges, &el.vertices), 2 * k);
    let (em, pm) = curved_monomial_moments(el, &basis, 2 * k)?;
    Ok(ElementFrame {
        basis,
        vertices: el.vertices.clone(),
        edges,
        element_measure: em[0],
        element_moments: em,
        projection_measure: pm[0],
        projection_moments: pm,
    })
}

/// `Π*`, `Π⁰_{h,k}` and `Π¹_{h,k-1}` of the physical IsoVEM on one element.
pub fn curved_projectors(el: &PhysicalElement, k: usize) -> Result<ElementProjectors, VemError> {
    build_projectors(&physical_frame(el, k)?, k)
}

/// Quadrature degree on `Ê` for moments of the exact curved element.
pub fn exact_geometry_degree(k: usize) -> usize {
    4 * k + 10
}

/// Frame of the exact curved element `F(Ê)`; `gids` orient the edges
/// canonically. Edges are `F` composed with the straight reference edges.
pub fn exact_frame(f: &dyn DomainMap, reference: &[Point2], gids: &[usize], k: usize) -> Result<ElementFrame, VemError> {
    let n = reference.len();
    let vertices: Vec<Point2> = reference.iter().map(|&p| f.eval(p)).collect();
    let edges: Vec<FrameEdge> = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let reversed = gids[i] > gids[j];
            let (s, e) = if reversed { (reference[j], reference[i]) } else { (reference[i], reference[j]) };
            let d = e - s;
            FrameEdge::sample(reversed, k + 6, |t| {
                let xi = s + d * t;
                let jac = f.jacobian(xi);
                (f.eval(xi), Point2::new(jac[0][0] * d.x + jac[0][1] * d.y, jac[1][0] * d.x + jac[1][1] * d.y))
            })
        })
        .collect();
    let rule = polygon_rule(reference, exact_geometry_degree(k));
    let mut pulled = Vec::with_capacity(rule.len());
    for q in &rule {
        let det = f.det(q.point);
        if det <= 0.0 {
            return Err(GeometryError::NonPositiveJacobian { det, at: q.point }.into());
        }
        pulled.push((f.eval(q.point), q.weight * det));
    }
    let integrate = |basis: &ScaledMonomialBasis, degree: usize| {
        let nm = monomial_dim(degree);
        let mut out = vec![0.0; nm];
        let mut m = vec![0.0; nm];
        for &(x, w) in &pulled {
            basis.eval_into(x, &mut m);
            for (o, v) in out.iter_mut().zip(&m) {
                *o += w * v;
            }
        }
        out
    };
    let tmp = provisional(&vertices);
    let m1 = integrate(&tmp, 1);
    let basis = ScaledMonomialBasis::new(centroid_from(&tmp, &m1), point_cloud_diameter(&edges, &vertices), 2 * k);
    let moments = integrate(&basis, 2 * k);
    Ok(ElementFrame {
        basis,
        vertices,
        edges,
        element_measure: moments[0],
        element_moments: moments.clone(),
        projection_measure: moments[0],
        projection_moments: moments,
    })
}
