//! Polygonal meshes of the reference square: topology, ingestion, generators
//! and shape diagnostics.

mod generate;
mod io;
mod shape;
mod voronoi;

use std::collections::HashMap;

use crate::geometry::{diameter, signed_area, Point2};

pub use generate::{generate_structured, StructuredKind};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh, MeshFormat};
pub use shape::{shape_diagnostics, CellShape, ShapeReport};
pub use voronoi::{cvt_energy, generate_voronoi_cvt, voronoi_cells, voronoi_from_seeds};

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A mesh edge, oriented as traversed by its left cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub v: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// Endpoints ordered by global index; the canonical edge parameter runs
    /// from the first to the second.
    pub fn canonical(&self) -> [usize; 2] {
        if self.v[0] < self.v[1] {
            self.v
        } else {
            [self.v[1], self.v[0]]
        }
    }
}

/// Immutable polygonal mesh with derived edge topology.
#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Point2>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    /// `cell_edges[c][i]` is the edge from local vertex `i` to `i + 1`.
    cell_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    h_max: f64,
}

impl PolygonalMesh {
    /// Builds and validates a mesh from CCW cell loops.
    pub fn new(vertices: Vec<Point2>, cells: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        for (i, p) in vertices.iter().enumerate() {
            if !p.is_finite() {
                return Err(MeshError::Topology(format!("vertex {i} is not finite")));
            }
        }
        if cells.is_empty() {
            return Err(MeshError::Topology("mesh has no cells".into()));
        }
        let mut h_max: f64 = 0.0;
        for (c, cell) in cells.iter().enumerate() {
            validate_cell(c, cell, &vertices)?;
            let pts: Vec<_> = cell.iter().map(|&v| vertices[v]).collect();
            h_max = h_max.max(diameter(&pts));
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (cell[i], cell[(i + 1) % n]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(MeshError::Topology(format!(
                                "edge ({a},{b}) is shared by more than two cells"
                            )));
                        }
                        if edge.v != [b, a] {
                            return Err(MeshError::Topology(format!(
                                "cells {} and {c} traverse edge ({a},{b}) in the same direction",
                                edge.left
                            )));
                        }
                        edge.right = Some(c);
                        local.push(e);
                    }
                    None => {
                        lookup.insert(key, edges.len());
                        local.push(edges.len());
                        edges.push(Edge {
                            v: [a, b],
                            left: c,
                            right: None,
                        });
                    }
                }
            }
            cell_edges.push(local);
        }

        let mut boundary_vertex = vec![false; vertices.len()];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[e.v[0]] = true;
            boundary_vertex[e.v[1]] = true;
        }
        let mut used = vec![false; vertices.len()];
        for &v in cells.iter().flatten() {
            used[v] = true;
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(MeshError::Topology(format!("vertex {v} belongs to no cell")));
        }

        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            boundary_vertex,
            h_max,
        })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point2> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        signed_area(&self.cell_points(c))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }
}

fn validate_cell(c: usize, cell: &[usize], vertices: &[Point2]) -> Result<(), MeshError> {
    let n = cell.len();
    if n < 3 {
        return Err(MeshError::Topology(format!("cell {c} has fewer than 3 vertices")));
    }
    if let Some(&v) = cell.iter().find(|&&v| v >= vertices.len()) {
        return Err(MeshError::Topology(format!("cell {c} references missing vertex {v}")));
    }
    let mut sorted = cell.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(MeshError::Topology(format!("cell {c} repeats a vertex")));
    }
    let pts: Vec<_> = cell.iter().map(|&v| vertices[v]).collect();
    let area = signed_area(&pts);
    if area <= 0.0 {
        return Err(MeshError::Topology(format!(
            "cell {c} is clockwise or degenerate (signed area {area:e})"
        )));
    }
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return Err(MeshError::Topology(format!("cell {c} is self-intersecting")));
            }
        }
    }
    Ok(())
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn single_square() {
        let m = PolygonalMesh::new(square(), vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(m.num_edges(), 4);
        assert!(m.edges().iter().all(Edge::is_boundary));
        assert!((m.h_max() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clockwise_cell_rejected() {
        let e = PolygonalMesh::new(square(), vec![vec![0, 3, 2, 1]]).unwrap_err();
        assert!(matches!(e, MeshError::Topology(_)));
    }

    #[test]
    fn bowtie_rejected() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, -1.0),
        ];
        // area positive overall but edges cross
        let e = PolygonalMesh::new(pts, vec![vec![4, 2, 1, 0, 3]]);
        assert!(e.is_err());
    }

    #[test]
    fn non_manifold_rejected() {
        let mut pts = square();
        pts.push(Point2::new(0.5, -1.0));
        pts.push(Point2::new(0.5, -2.0));
        // two cells below edge (0,1) with the same orientation
        let cells = vec![vec![0, 1, 2, 3], vec![0, 4, 1], vec![0, 5, 1]];
        assert!(PolygonalMesh::new(pts, cells).is_err());
    }
}
