use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isovem::cases::{CaseKind, TestCase};
use isovem::geometry::Point2;

/// `-∇·(a∇u) + b·∇u + c u` with the divergence of the flux taken by central
/// differences.
fn fd_operator(tc: &TestCase, x: Point2) -> f64 {
    let p = &tc.problem;
    let grad = p.grad_u.as_ref().unwrap();
    let flux = |y: Point2| {
        let g = grad(y);
        let a = (p.a)(y);
        Point2::new(a[(0, 0)] * g.x + a[(0, 1)] * g.y, a[(1, 0)] * g.x + a[(1, 1)] * g.y)
    };
    let h = 1e-5;
    let (ex, ey) = (Point2::new(h, 0.0), Point2::new(0.0, h));
    let div = (flux(x + ex).x - flux(x - ex).x + flux(x + ey).y - flux(x - ey).y) / (2.0 * h);
    -div + (p.b)(x).dot(grad(x)) + (p.c)(x) * (p.u.as_ref().unwrap())(x)
}

fn sample_points(tc: &TestCase, n: usize) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    (0..n).map(|_| tc.map.eval(Point2::new(rng.random(), rng.random()))).collect()
}

#[test]
fn forcing_matches_finite_difference_operator() {
    for kind in [CaseKind::Annulus, CaseKind::Plane, CaseKind::Identity] {
        let tc = TestCase::new(kind);
        for x in sample_points(&tc, 200) {
            let (f, fd) = ((tc.problem.f)(x), fd_operator(&tc, x));
            assert!((f - fd).abs() <= 1e-6 * (1.0 + f.abs()), "{kind} at {x:?}: {f} vs {fd}");
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    for kind in [CaseKind::Annulus, CaseKind::Plane, CaseKind::Identity] {
        let tc = TestCase::new(kind);
        let u = tc.problem.u.as_ref().unwrap();
        let g = tc.problem.grad_u.as_ref().unwrap();
        let h = 1e-6;
        for x in sample_points(&tc, 50) {
            let dx = (u(x + Point2::new(h, 0.0)) - u(x - Point2::new(h, 0.0))) / (2.0 * h);
            let dy = (u(x + Point2::new(0.0, h)) - u(x - Point2::new(0.0, h))) / (2.0 * h);
            assert!((g(x) - Point2::new(dx, dy)).norm() < 1e-7, "{kind} at {x:?}");
        }
    }
}

#[test]
fn divergence_of_convection_field() {
    for kind in [CaseKind::Annulus, CaseKind::Plane] {
        let p = TestCase::new(kind).problem;
        let h = 1e-6;
        for x in [Point2::new(1.2, 0.4), Point2::new(0.3, 1.5)] {
            let fd = ((p.b)(x + Point2::new(h, 0.0)).x - (p.b)(x - Point2::new(h, 0.0)).x
                + (p.b)(x + Point2::new(0.0, h)).y
                - (p.b)(x - Point2::new(0.0, h)).y)
                / (2.0 * h);
            assert!(((p.div_b)(x) - fd).abs() < 1e-8);
        }
    }
}

#[test]
fn plane_reaction_goes_negative_somewhere() {
    // μ = c - ½∇·b = x² + y³ + 1 dips below zero on part of the plane domain
    let tc = TestCase::new(CaseKind::Plane);
    let check = tc.problem.check_data(&sample_points(&tc, 2000)).unwrap();
    assert!(check.negative_mu > 0 && check.min_mu < 0.0);
}
