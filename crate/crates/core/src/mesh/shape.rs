use super::PolygonalMesh;
use crate::geometry::{diameter, polygon_centroid, signed_area, Point2};

#[derive(Debug, Clone, PartialEq)]
pub struct CellShape {
    pub diameter: f64,
    pub area: f64,
    pub centroid: Point2,
    /// Shortest edge over diameter.
    pub min_edge_ratio: f64,
    /// Largest centroid-centred inscribed ball radius over diameter.
    pub inradius_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ShapeReport {
    pub cells: Vec<CellShape>,
    /// Smallest `min_edge_ratio` over the mesh.
    pub alpha_min: f64,
    pub alpha_threshold: f64,
    /// Cells whose `min_edge_ratio` falls below the threshold.
    pub flagged: Vec<usize>,
}

/// Per-cell size and regularity metrics; cells below `alpha` are flagged.
pub fn shape_diagnostics(mesh: &PolygonalMesh, alpha: f64) -> ShapeReport {
    let cells: Vec<CellShape> = (0..mesh.num_cells()).map(|c| cell_shape(&mesh.cell_points(c))).collect();
    let alpha_min = cells.iter().map(|c| c.min_edge_ratio).fold(f64::INFINITY, f64::min);
    let flagged = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.min_edge_ratio < alpha)
        .map(|(i, _)| i)
        .collect();
    ShapeReport {
        cells,
        alpha_min,
        alpha_threshold: alpha,
        flagged,
    }
}

fn cell_shape(p: &[Point2]) -> CellShape {
    let n = p.len();
    let h = diameter(p);
    let centroid = polygon_centroid(p);
    let mut min_edge = f64::INFINITY;
    let mut rho = f64::INFINITY;
    for i in 0..n {
        let (a, b) = (p[i], p[(i + 1) % n]);
        min_edge = min_edge.min(a.dist(b));
        rho = rho.min(point_segment_distance(centroid, a, b));
    }
    CellShape {
        diameter: h,
        area: signed_area(p),
        centroid,
        min_edge_ratio: min_edge / h,
        inradius_ratio: rho / h,
    }
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
    p.dist(a + d * t)
}
