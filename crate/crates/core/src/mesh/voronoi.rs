use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MeshError, PolygonalMesh};
use crate::geometry::{polygon_centroid, polygon_rule, Point2};

const MERGE_TOL: f64 = 1e-10;

fn unit_square() -> Vec<Point2> {
    vec![
        Point2::new(0.0, 0.0),
        Point2::new(1.0, 0.0),
        Point2::new(1.0, 1.0),
        Point2::new(0.0, 1.0),
    ]
}

/// Centroidal Voronoi tessellation of the unit square: `n_cells` jittered
/// seeds relaxed by `lloyd_iters` Lloyd steps.
pub fn generate_voronoi_cvt(n_cells: usize, lloyd_iters: usize, seed: u64) -> Result<PolygonalMesh, MeshError> {
    if n_cells == 0 {
        return Err(MeshError::Topology("Voronoi mesh needs at least one cell".into()));
    }
    if n_cells == 1 {
        return PolygonalMesh::new(unit_square(), vec![vec![0, 1, 2, 3]]);
    }
    Ok(voronoi_from_seeds(&stratified_seeds(n_cells, seed), lloyd_iters)?.0)
}

/// Jittered seeds, one per slot of a near-square arrangement of row strips.
fn stratified_seeds(n: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = ((n as f64).sqrt().round() as usize).max(1);
    let mut seeds = Vec::with_capacity(n);
    for r in 0..rows {
        let count = n * (r + 1) / rows - n * r / rows;
        for i in 0..count {
            let x = (i as f64 + rng.random::<f64>()) / count as f64;
            let y = (r as f64 + rng.random::<f64>()) / rows as f64;
            seeds.push(Point2::new(x, y));
        }
    }
    seeds
}

/// Voronoi mesh of the given seeds after `lloyd_iters` Lloyd steps; also
/// returns the final seeds.
pub fn voronoi_from_seeds(seeds: &[Point2], lloyd_iters: usize) -> Result<(PolygonalMesh, Vec<Point2>), MeshError> {
    if seeds.is_empty() {
        return Err(MeshError::Topology("no seeds".into()));
    }
    if let Some(p) = seeds.iter().find(|p| !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y)) {
        return Err(MeshError::Topology(format!("seed {p:?} lies outside the unit square")));
    }
    let mut seeds = seeds.to_vec();
    separate_coincident(&mut seeds);
    let mut cells = voronoi_cells(&seeds);
    for _ in 0..lloyd_iters {
        seeds = cells.iter().map(|c| polygon_centroid(c)).collect();
        separate_coincident(&mut seeds);
        cells = voronoi_cells(&seeds);
    }
    Ok((assemble(&cells)?, seeds))
}

/// Nudges seeds that coincide (to 1e-12) with an earlier one.
fn separate_coincident(seeds: &mut [Point2]) {
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by(|&a, &b| seeds[a].x.total_cmp(&seeds[b].x).then(seeds[a].y.total_cmp(&seeds[b].y)));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for w in 1..order.len() {
        let (i, j) = (order[w - 1], order[w]);
        if seeds[i].dist(seeds[j]) < 1e-12 {
            let scale = 1e-6 / (seeds.len() as f64).sqrt();
            let mut p = seeds[j];
            p.x = (p.x + scale * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0);
            p.y = (p.y + scale * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0);
            log::warn!("seed {j} coincides with seed {i}; moved to {p:?}");
            seeds[j] = p;
        }
    }
}

/// Clipped Voronoi cells (CCW, convex), one per seed.
pub fn voronoi_cells(seeds: &[Point2]) -> Vec<Vec<Point2>> {
    let n = seeds.len();
    let g = (n as f64).sqrt().ceil().max(1.0) as usize;
    let bs = 1.0 / g as f64;
    let bucket_of = |p: Point2| {
        let bx = ((p.x / bs) as usize).min(g - 1);
        let by = ((p.y / bs) as usize).min(g - 1);
        (bx, by)
    };
    let mut buckets = vec![Vec::new(); g * g];
    for (i, &s) in seeds.iter().enumerate() {
        let (bx, by) = bucket_of(s);
        buckets[by * g + bx].push(i);
    }

    seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut poly = unit_square();
            let (bx, by) = bucket_of(s);
            let mut r_max = radius(&poly, s);
            for ring in 0..=g {
                // every seed in this ring is at least (ring - 1) buckets away
                if ring >= 2 && (ring - 1) as f64 * bs > 2.0 * r_max {
                    break;
                }
                for (cx, cy) in ring_buckets(bx, by, ring, g) {
                    for &j in &buckets[cy * g + cx] {
                        if j != i {
                            poly = clip(&poly, s, seeds[j]);
                        }
                    }
                }
                r_max = radius(&poly, s);
            }
            poly
        })
        .collect()
}

fn radius(poly: &[Point2], s: Point2) -> f64 {
    poly.iter().map(|p| p.dist(s)).fold(0.0, f64::max)
}

fn ring_buckets(bx: usize, by: usize, ring: usize, g: usize) -> Vec<(usize, usize)> {
    let (bx, by, r, g) = (bx as i64, by as i64, ring as i64, g as i64);
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx.abs().max(dy.abs()) != r {
                continue;
            }
            let (x, y) = (bx + dx, by + dy);
            if (0..g).contains(&x) && (0..g).contains(&y) {
                out.push((x as usize, y as usize));
            }
        }
    }
    out
}

/// Sutherland–Hodgman clip keeping the side of the bisector nearer to `s`.
fn clip(poly: &[Point2], s: Point2, other: Point2) -> Vec<Point2> {
    let d = other - s;
    if d.norm() < 1e-14 {
        return poly.to_vec();
    }
    let m = (s + other) * 0.5;
    let f = |p: Point2| (p - m).dot(d);
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let (fa, fb) = (f(a), f(b));
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa <= 0.0) != (fb <= 0.0) {
            let t = fa / (fa - fb);
            out.push(a + (b - a) * t);
        }
    }
    dedup_loop(&mut out, 1e-14);
    out
}

fn dedup_loop(pts: &mut Vec<Point2>, tol: f64) {
    pts.dedup_by(|a, b| a.dist(*b) <= tol);
    while pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) <= tol {
        pts.pop();
    }
}

/// Merges shared corners of independently clipped cells into one mesh.
fn assemble(cells: &[Vec<Point2>]) -> Result<PolygonalMesh, MeshError> {
    let key = |p: Point2| ((p.x / MERGE_TOL).round() as i64, (p.y / MERGE_TOL).round() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Point2> = Vec::new();
    let mut loops = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut ids: Vec<usize> = Vec::with_capacity(cell.len());
        for &p in cell {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        if let Some(&v) = list.iter().find(|&&v| vertices[v].dist(p) <= MERGE_TOL) {
                            found = Some(v);
                            break 'search;
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                vertices.push(p);
                grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            ids.push(v);
        }
        ids.dedup();
        while ids.len() > 1 && ids[0] == ids[ids.len() - 1] {
            ids.pop();
        }
        loops.push(ids);
    }
    PolygonalMesh::new(vertices, loops)
}

/// `Σ_i ∫_{V_i} |x - s_i|² dx`.
pub fn cvt_energy(seeds: &[Point2], cells: &[Vec<Point2>]) -> f64 {
    seeds
        .iter()
        .zip(cells)
        .map(|(&s, c)| {
            polygon_rule(c, 2)
                .iter()
                .map(|q| q.weight * (q.point - s).dot(q.point - s))
                .sum::<f64>()
        })
        .sum()
}
