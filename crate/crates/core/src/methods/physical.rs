use std::sync::Arc;

use nalgebra::Matrix2;
use rayon::prelude::*;

use super::{
    assembly_degree, Discretization, IntegrationPoint, MethodContext, MethodError, PreparedMethod, SolutionFrame,
};
use crate::curved_space::curved_projectors;
use crate::geometry::{polygon_rule, Point2};
use crate::mapping::{map_cells, PhysicalElement};
use crate::mesh::PolygonalMesh;
use crate::vem_space::ElementProjectors;

/// Physical IsoVEM on the virtual mesh `F_h(𝒯̂_h)`, integrating over the
/// projected elements `E_h^π`.
pub struct PhysicalIsoVem;

struct Cell {
    element: PhysicalElement,
    projectors: ElementProjectors,
}

struct Prepared {
    mesh: Arc<PolygonalMesh>,
    k: usize,
    degree: usize,
    cells: Vec<Cell>,
}

impl Discretization for PhysicalIsoVem {
    fn name(&self) -> &'static str {
        "physical"
    }

    fn frame(&self) -> SolutionFrame {
        SolutionFrame::Physical
    }

    fn prepare(&self, ctx: &MethodContext) -> Result<Box<dyn PreparedMethod>, MethodError> {
        let map = ctx.map.as_ref().ok_or(MethodError::MissingMap("physical"))?;
        let cells = map_cells(&ctx.mesh, map)?
            .into_par_iter()
            .map(|mc| {
                let projectors = curved_projectors(&mc.physical, ctx.k)?;
                Ok(Cell {
                    element: mc.physical,
                    projectors,
                })
            })
            .collect::<Result<Vec<_>, MethodError>>()?;
        Ok(Box::new(Prepared {
            mesh: ctx.mesh.clone(),
            k: ctx.k,
            degree: assembly_degree(ctx.k, map.l, ctx.quad_bump),
            cells,
        }))
    }
}

impl PreparedMethod for Prepared {
    fn name(&self) -> &'static str {
        "physical"
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
        &self.cells[cell].element.vertices
    }

    fn points(&self, cell: usize, degree: usize) -> Result<Vec<IntegrationPoint>, MethodError> {
        let el = &self.cells[cell].element;
        let p = &el.projected_map;
        polygon_rule(&el.reference, degree)
            .into_iter()
            .map(|q| {
                let det = p.det(q.point);
                if det <= 0.0 {
                    return Err(MethodError::Jacobian { cell, det });
                }
                let x = p.eval(q.point);
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
        self.cells[cell].element.edges[edge].eval(t)
    }

    fn assembly_degree(&self) -> usize {
        self.degree
    }
}
