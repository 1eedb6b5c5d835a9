use std::sync::Arc;

use nalgebra::Matrix2;
use rayon::prelude::*;

use super::{
    straight_edge, Discretization, IntegrationPoint, MethodContext, MethodError, PreparedMethod, SolutionFrame,
};
use crate::curved_space::exact_frame;
use crate::geometry::{polygon_rule, Point2};
use crate::mapping::DomainMap;
use crate::mesh::PolygonalMesh;
use crate::vem_space::{build_projectors, ElementProjectors};

/// Curved VEM on the exact elements `F(Ê)`, all integrals pulled back
/// through the analytic map.
pub struct CurvedVem;

struct Cell {
    reference: Vec<Point2>,
    vertices: Vec<Point2>,
    projectors: ElementProjectors,
}

struct Prepared {
    mesh: Arc<PolygonalMesh>,
    analytic: Arc<dyn DomainMap>,
    k: usize,
    degree: usize,
    cells: Vec<Cell>,
}

impl Discretization for CurvedVem {
    fn name(&self) -> &'static str {
        "curved"
    }

    fn frame(&self) -> SolutionFrame {
        SolutionFrame::Physical
    }

    fn prepare(&self, ctx: &MethodContext) -> Result<Box<dyn PreparedMethod>, MethodError> {
        let mesh = &ctx.mesh;
        let f = ctx.analytic.as_ref();
        let cells = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| {
                let reference = mesh.cell_points(c);
                let frame = exact_frame(f, &reference, mesh.cell(c), ctx.k)?;
                Ok(Cell {
                    vertices: frame.vertices.clone(),
                    projectors: build_projectors(&frame, ctx.k)?,
                    reference,
                })
            })
            .collect::<Result<Vec<_>, MethodError>>()?;
        Ok(Box::new(Prepared {
            mesh: mesh.clone(),
            analytic: ctx.analytic.clone(),
            k: ctx.k,
            degree: 2 * ctx.k + 8 + ctx.quad_bump,
            cells,
        }))
    }
}

impl PreparedMethod for Prepared {
    fn name(&self) -> &'static str {
        "curved"
    }

    fn frame(&self) -> SolutionFrame {
        SolutionFrame::Physical
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
        &self.cells[cell].vertices
    }

    fn points(&self, cell: usize, degree: usize) -> Result<Vec<IntegrationPoint>, MethodError> {
        polygon_rule(&self.cells[cell].reference, degree)
            .into_iter()
            .map(|q| {
                let det = self.analytic.det(q.point);
                if det <= 0.0 {
                    return Err(MethodError::Jacobian { cell, det });
                }
                let x = self.analytic.eval(q.point);
                Ok(IntegrationPoint {
                    at: x,
                    x,
                    weight: q.weight * det,
                    t: Matrix2::identity(),
                    m: Matrix2::identity(),
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
