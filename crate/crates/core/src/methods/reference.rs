use std::sync::Arc;

use nalgebra::Matrix2;
use rayon::prelude::*;

use super::{
    assembly_degree, straight_edge, Discretization, IntegrationPoint, MethodContext, MethodError, PreparedMethod,
    SolutionFrame,
};
use crate::geometry::{polygon_rule, Point2};
use crate::mapping::{map_cells, to_matrix, DomainMap, ProjectedJacobian};
use crate::mesh::PolygonalMesh;
use crate::vem_space::{build_projectors, straight_frame, ElementProjectors};

/// Reference IsoVEM: the problem pulled back to `Ω̂` through `J_{F,h}`.
pub struct ReferenceIsoVem;

struct Cell {
    reference: Vec<Point2>,
    physical_vertices: Vec<Point2>,
    projectors: ElementProjectors,
    jacobian: ProjectedJacobian,
}

struct Prepared {
    mesh: Arc<PolygonalMesh>,
    analytic: Arc<dyn DomainMap>,
    k: usize,
    degree: usize,
    cells: Vec<Cell>,
}

impl Discretization for ReferenceIsoVem {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn frame(&self) -> SolutionFrame {
        SolutionFrame::Reference
    }

    fn prepare(&self, ctx: &MethodContext) -> Result<Box<dyn PreparedMethod>, MethodError> {
        let map = ctx.map.as_ref().ok_or(MethodError::MissingMap("reference"))?;
        let mesh = &ctx.mesh;
        let mapped = map_cells(mesh, map)?;
        let cells = mapped
            .into_par_iter()
            .enumerate()
            .map(|(c, mc)| {
                let reference = mesh.cell_points(c);
                let projectors = build_projectors(&straight_frame(&reference, mesh.cell(c), ctx.k)?, ctx.k)?;
                Ok(Cell {
                    physical_vertices: reference.iter().map(|&p| ctx.analytic.eval(p)).collect(),
                    reference,
                    projectors,
                    jacobian: mc.jacobian,
                })
            })
            .collect::<Result<Vec<_>, MethodError>>()?;
        Ok(Box::new(Prepared {
            mesh: mesh.clone(),
            analytic: ctx.analytic.clone(),
            k: ctx.k,
            degree: assembly_degree(ctx.k, map.l, ctx.quad_bump),
            cells,
        }))
    }
}

impl PreparedMethod for Prepared {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn frame(&self) -> SolutionFrame {
        SolutionFrame::Reference
    }

    fn k(&self) -> usize {
        self.k
    }

    fn mesh(&self) -> &PolygonalMesh {
        &self.mesh
    }

    fn projectors(&self, cell: usize) -> &ElementProjectors {
        &self.cells[cell].projectors
    }

    fn vertex_points(&self, cell: usize) -> &[Point2] {
        &self.cells[cell].physical_vertices
    }

    fn points(&self, cell: usize, degree: usize) -> Result<Vec<IntegrationPoint>, MethodError> {
        let c = &self.cells[cell];
        polygon_rule(&c.reference, degree)
            .into_iter()
            .map(|q| {
                let xi = q.point;
                let det = c.jacobian.det_at(xi);
                if det <= 0.0 {
                    return Err(MethodError::Jacobian { cell, det });
                }
                let jh = c.jacobian.eval(xi);
                let t = inverse_transpose(&jh, det);
                let jf: Matrix2<f64> = to_matrix(self.analytic.jacobian(xi));
                Ok(IntegrationPoint {
                    at: xi,
                    x: self.analytic.eval(xi),
                    weight: q.weight * det,
                    t,
                    m: t * jf.transpose(),
                })
            })
            .collect()
    }

    fn edge_point(&self, cell: usize, edge: usize, t: f64) -> Point2 {
        let c = &self.cells[cell];
        self.analytic.eval(straight_edge(&c.reference, self.mesh.cell(cell), edge, t))
    }

    fn assembly_degree(&self) -> usize {
        self.degree
    }
}

fn inverse_transpose(j: &Matrix2<f64>, det: f64) -> Matrix2<f64> {
    Matrix2::new(j[(1, 1)], -j[(1, 0)], -j[(0, 1)], j[(0, 0)]) / det
}
