use super::curve::check_closed;
use super::monomial::{eval_local, monomial_dim, monomial_exponents};
use super::quadrature::{polygon_rule, GaussRule1D};
use super::{signed_area, GeometryError, Point2, PolyMap2, PolynomialCurve, ScaledMonomialBasis};

/// `∫_E m_α dx` for `|α| <= degree` over a straight CCW polygon.
pub fn polygon_moments(
    cell: &[Point2],
    basis: &ScaledMonomialBasis,
    degree: usize,
) -> Result<Vec<f64>, GeometryError> {
    let area = signed_area(cell);
    if area <= 0.0 {
        return Err(GeometryError::DegeneratePolygon(area));
    }
    let n = monomial_dim(degree);
    let mut out = vec![0.0; n];
    let mut m = vec![0.0; n];
    for q in polygon_rule(cell, degree) {
        basis.eval_into(q.point, &mut m);
        for (o, v) in out.iter_mut().zip(&m) {
            *o += q.weight * v;
        }
    }
    Ok(out)
}

/// `∫_{map(Ê)} m_α dx`, pulled back to the reference cell.
///
/// The integrand `m_α(map(ξ)) det ∇map(ξ)` is polynomial of degree
/// `degree·l + 2(l-1)` and is integrated exactly.
pub fn curved_moments(
    ref_cell: &[Point2],
    map: &PolyMap2,
    basis: &ScaledMonomialBasis,
    degree: usize,
) -> Result<Vec<f64>, GeometryError> {
    let l = map.p.degree().max(map.q.degree()).max(1);
    let rule_degree = degree * l + 2 * (l - 1);
    let n = monomial_dim(degree);
    let mut out = vec![0.0; n];
    let mut m = vec![0.0; n];
    for q in polygon_rule(ref_cell, rule_degree) {
        let det = map.det(q.point);
        if det <= 0.0 {
            return Err(GeometryError::NonPositiveJacobian { det, at: q.point });
        }
        basis.eval_into(map.eval(q.point), &mut m);
        for (o, v) in out.iter_mut().zip(&m) {
            *o += q.weight * det * v;
        }
    }
    Ok(out)
}

/// `∫_E m_α dx` for a region bounded by a closed CCW loop of polynomial
/// curves, reduced to `∮ Φ_α dy` with `∂Φ_α/∂x = m_α`.
pub fn boundary_moments(
    edges: &[PolynomialCurve],
    basis: &ScaledMonomialBasis,
    degree: usize,
) -> Result<Vec<f64>, GeometryError> {
    check_closed(edges)?;
    let n = monomial_dim(degree);
    let mut out = vec![0.0; n];
    // one extra x-power for Φ
    let mut m = vec![0.0; monomial_dim(degree + 1)];
    let h = basis.diameter;
    for e in edges {
        let l = e.degree().max(1);
        let rule = GaussRule1D::new(((degree + 2) * l).div_ceil(2) + 1).unit_interval();
        for &(t, w) in &rule {
            let (u, v) = basis.local(e.eval(t));
            eval_local(u, v, &mut m);
            let dy = e.deriv(t).y;
            for (i, o) in out.iter_mut().enumerate() {
                let (a, b) = monomial_exponents(i);
                let up = super::monomial_index(a + 1, b);
                *o += w * dy * h * m[up] / (a + 1) as f64;
            }
        }
    }
    Ok(out)
}
