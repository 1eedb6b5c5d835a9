//! Gauss–Legendre rules and collapsed-square (Duffy) rules on polygons.

use std::sync::OnceLock;

use super::Point2;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const CACHED_RULES: usize = 64;

fn cache() -> &'static [GaussRule1D] {
    static RULES: OnceLock<Vec<GaussRule1D>> = OnceLock::new();
    RULES.get_or_init(|| (1..=CACHED_RULES).map(GaussRule1D::compute).collect())
}

impl GaussRule1D {
    /// Rule with `n` points, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one point");
        if n <= CACHED_RULES {
            cache()[n - 1].clone()
        } else {
            Self::compute(n)
        }
    }

    /// Cheapest rule exact for polynomials of degree `degree`.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(points_for_degree(degree))
    }

    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[0, 1]`.
    pub fn unit_interval(&self) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect()
    }
}

/// Number of Gauss points to integrate degree `d` exactly: `ceil((d+1)/2)`.
pub fn points_for_degree(d: usize) -> usize {
    (d + 2) / 2
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// A weighted quadrature node.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub point: Point2,
    pub weight: f64,
}

/// Rule on the triangle `(a, b, c)` exact for degree `degree`, with weights
/// carrying the triangle's signed area.
pub fn triangle_rule(a: Point2, b: Point2, c: Point2, degree: usize, out: &mut Vec<QuadPoint>) {
    // (s, t) in the unit square -> (s, (1 - s) t); Jacobian (1 - s) raises the
    // degree in s by one.
    let rule = GaussRule1D::new(points_for_degree(degree + 1)).unit_interval();
    let area2 = (b - a).cross(c - a);
    for &(s, ws) in &rule {
        for &(t, wt) in &rule {
            let u = s;
            let v = (1.0 - s) * t;
            let p = a + (b - a) * u + (c - a) * v;
            out.push(QuadPoint {
                point: p,
                weight: ws * wt * (1.0 - s) * area2,
            });
        }
    }
}

/// Rule on a simple polygon exact for polynomials of degree `degree`.
///
/// Uses a signed fan from the vertex average, which stays exact for
/// polynomial integrands on any simple polygon.
pub fn polygon_rule(vertices: &[Point2], degree: usize) -> Vec<QuadPoint> {
    let n = vertices.len();
    let mut center = Point2::default();
    for v in vertices {
        center = center + *v;
    }
    center = center * (1.0 / n as f64);
    let per_tri = points_for_degree(degree + 1).pow(2);
    let mut out = Vec::with_capacity(n * per_tri);
    for i in 0..n {
        triangle_rule(center, vertices[i], vertices[(i + 1) % n], degree, &mut out);
    }
    out
}
