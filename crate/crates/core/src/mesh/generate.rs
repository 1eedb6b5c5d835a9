use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::voronoi::voronoi_from_seeds;
use super::{MeshError, PolygonalMesh};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuredKind {
    Quads,
    PerturbedQuads,
    HexagonDominant,
}

impl std::str::FromStr for StructuredKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quads" => Ok(Self::Quads),
            "perturbed" | "perturbed_quads" => Ok(Self::PerturbedQuads),
            "hex" | "hexagon_dominant" => Ok(Self::HexagonDominant),
            _ => Err(format!("unknown structured mesh kind `{s}`")),
        }
    }
}

/// Deterministic mesh families of the unit square.
pub fn generate_structured(kind: StructuredKind, n: usize, seed: u64) -> Result<PolygonalMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::Topology("structured mesh needs n >= 1".into()));
    }
    match kind {
        StructuredKind::Quads => quad_grid(n, None),
        StructuredKind::PerturbedQuads => quad_grid(n, Some(seed)),
        StructuredKind::HexagonDominant => hex_lattice(n),
    }
}

fn quad_grid(n: usize, jitter_seed: Option<u64>) -> Result<PolygonalMesh, MeshError> {
    let h = 1.0 / n as f64;
    let mut rng = jitter_seed.map(ChaCha8Rng::seed_from_u64);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let mut p = Point2::new(i as f64 * h, j as f64 * h);
            if let Some(rng) = rng.as_mut() {
                if i > 0 && i < n && j > 0 && j < n {
                    let r = 0.2 * h * rng.random::<f64>();
                    let a = std::f64::consts::TAU * rng.random::<f64>();
                    p = p + Point2::new(r * a.cos(), r * a.sin());
                }
            }
            vertices.push(p);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolygonalMesh::new(vertices, cells)
}

/// Voronoi diagram of a staggered lattice with `n` seeds per row.
fn hex_lattice(n: usize) -> Result<PolygonalMesh, MeshError> {
    let rows = ((n as f64) * 2.0 / 3f64.sqrt()).round().max(1.0) as usize;
    let mut seeds = Vec::new();
    for j in 0..rows {
        let y = (j as f64 + 0.5) / rows as f64;
        let shift = if j % 2 == 1 { 0.25 } else { -0.25 };
        for i in 0..n {
            seeds.push(Point2::new((i as f64 + 0.5 + shift) / n as f64, y));
        }
    }
    if seeds.len() == 1 {
        return quad_grid(1, None);
    }
    Ok(voronoi_from_seeds(&seeds, 0)?.0)
}
