use super::quadrature::GaussRule1D;
use super::{GeometryError, Point2};

/// Planar curve `t -> (x(t), y(t))` on `[0, 1]` with coefficients in powers of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCurve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PolynomialCurve {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(!x.is_empty() && x.len() == y.len());
        Self { x, y }
    }

    pub fn segment(a: Point2, b: Point2) -> Self {
        Self::new(vec![a.x, b.x - a.x], vec![a.y, b.y - a.y])
    }

    /// Curve from coefficients in powers of `(t - 1/2)`.
    pub fn from_centered(cx: &[f64], cy: &[f64]) -> Self {
        Self::new(recenter(cx, -0.5), recenter(cy, -0.5))
    }

    pub fn degree(&self) -> usize {
        self.x.len() - 1
    }

    pub fn eval(&self, t: f64) -> Point2 {
        Point2::new(horner(&self.x, t), horner(&self.y, t))
    }

    pub fn deriv(&self, t: f64) -> Point2 {
        Point2::new(horner_deriv(&self.x, t), horner_deriv(&self.y, t))
    }

    pub fn start(&self) -> Point2 {
        self.eval(0.0)
    }

    pub fn end(&self) -> Point2 {
        self.eval(1.0)
    }

    /// Same curve traversed from `t = 1` to `t = 0`.
    pub fn reversed(&self) -> Self {
        let flip = |c: &[f64]| {
            // p(1 - t) = Σ c_i (τ + 1)^i with τ = -t
            let mut r = recenter(c, 1.0);
            for (i, v) in r.iter_mut().enumerate() {
                if i % 2 == 1 {
                    *v = -*v;
                }
            }
            r
        };
        Self::new(flip(&self.x), flip(&self.y))
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

fn horner_deriv(c: &[f64], t: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &a)| acc * t + i as f64 * a)
}

/// Expands `Σ c_i (τ + shift)^i` in powers of `τ`.
fn recenter(c: &[f64], shift: f64) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n];
    for (i, &ci) in c.iter().enumerate() {
        let mut binom = 1.0;
        for j in 0..=i {
            out[j] += ci * binom * shift.powi((i - j) as i32);
            binom = binom * (i - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

/// Which component of the curve velocity multiplies the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveComponent {
    TangentX,
    TangentY,
    /// x-component of the clockwise-rotated velocity `(y', -x')`.
    NormalX,
    NormalY,
}

/// `∫₀¹ g(γ(t)) c(t) dt`, with `c` the selected velocity component.
pub fn curve_line_integral(
    curve: &PolynomialCurve,
    g: impl Fn(Point2) -> f64,
    component: CurveComponent,
    n_gauss: usize,
) -> f64 {
    let rule = GaussRule1D::new(n_gauss).unit_interval();
    rule.iter()
        .map(|&(t, w)| {
            let d = curve.deriv(t);
            let c = match component {
                CurveComponent::TangentX => d.x,
                CurveComponent::TangentY => d.y,
                CurveComponent::NormalX => d.y,
                CurveComponent::NormalY => -d.x,
            };
            w * g(curve.eval(t)) * c
        })
        .sum()
}

/// Area enclosed by a closed counterclockwise loop of curves, via `∮ x dy`.
pub fn cell_area_by_boundary(edges: &[PolynomialCurve]) -> Result<f64, GeometryError> {
    check_closed(edges)?;
    Ok(edges
        .iter()
        .map(|e| curve_line_integral(e, |p| p.x, CurveComponent::TangentY, e.degree().max(1)))
        .sum())
}

pub(crate) fn check_closed(edges: &[PolynomialCurve]) -> Result<(), GeometryError> {
    let n = edges.len();
    for i in 0..n {
        let gap = edges[i].end().dist(edges[(i + 1) % n].start());
        if gap > 1e-10 {
            return Err(GeometryError::OpenLoop(gap));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_edge_outward_normal() {
        let e = PolynomialCurve::segment(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0));
        let v = curve_line_integral(&e, |_| 1.0, CurveComponent::NormalY, 1);
        assert!((v + 1.0).abs() < 1e-15);
        let v = curve_line_integral(&e, |p| p.x, CurveComponent::TangentX, 1);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parabola_tangent() {
        let c = PolynomialCurve::new(vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]);
        let v = curve_line_integral(&c, |_| 1.0, CurveComponent::TangentX, 2);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reversal_and_recentering() {
        let c = PolynomialCurve::new(vec![0.2, -1.0, 3.0, 0.5], vec![1.0, 0.5, -2.0, 1.0]);
        let r = c.reversed();
        for t in [0.0, 0.3, 0.8, 1.0] {
            assert!(c.eval(t).dist(r.eval(1.0 - t)) < 1e-14);
        }
        // (t - 1/2)^2 in t-powers is t^2 - t + 1/4
        let q = PolynomialCurve::from_centered(&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]);
        assert!((q.x[0] - 0.25).abs() < 1e-15 && (q.x[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_square_area() {
        let p = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let edges: Vec<_> = (0..4).map(|i| PolynomialCurve::segment(p[i], p[(i + 1) % 4])).collect();
        assert!((cell_area_by_boundary(&edges).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn open_loop_rejected() {
        let edges = vec![
            PolynomialCurve::segment(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)),
            PolynomialCurve::segment(Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)),
            PolynomialCurve::segment(Point2::new(0.0, 1.0), Point2::new(0.0, 0.1)),
        ];
        assert!(matches!(cell_area_by_boundary(&edges), Err(GeometryError::OpenLoop(_))));
    }

    #[test]
    fn inscribed_polygon_area_converges_quadratically() {
        let disk = |n: usize| {
            let pts: Vec<_> = (0..n)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    Point2::new(a.cos(), a.sin())
                })
                .collect();
            let edges: Vec<_> = (0..n)
                .map(|i| PolynomialCurve::segment(pts[i], pts[(i + 1) % n]))
                .collect();
            cell_area_by_boundary(&edges).unwrap()
        };
        let e1 = std::f64::consts::PI - disk(32);
        let e2 = std::f64::consts::PI - disk(64);
        assert!(e1 > 0.0 && e2 > 0.0);
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.01);
    }
}
