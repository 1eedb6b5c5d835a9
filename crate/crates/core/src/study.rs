//! Convergence studies: mesh sequences, per-level solve and error tables.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{fill_eoc, solution_errors, AnalysisError, ErrorRecord};
use crate::cases::{CaseKind, TestCase};
use crate::mapping::{interpolate_map, load_map, MapError, VirtualMap};
use crate::mesh::{generate_structured, generate_voronoi_cvt, load_mesh, MeshError, PolygonalMesh, StructuredKind};
use crate::methods::{
    apply_dirichlet, assemble, boundary_values, solve, MethodContext, MethodError, MethodRegistry, PreparedMethod,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Voronoi,
    Quads,
    Perturbed,
}

impl FromStr for MeshKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "voronoi" => Ok(Self::Voronoi),
            "quads" => Ok(Self::Quads),
            "perturbed" => Ok(Self::Perturbed),
            other => Err(format!("unknown mesh family `{other}` (expected voronoi, quads or perturbed)")),
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Voronoi => "voronoi",
            Self::Quads => "quads",
            Self::Perturbed => "perturbed",
        })
    }
}

pub const DEFAULT_LLOYD_ITERS: usize = 40;

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub case: CaseKind,
    pub method: String,
    pub k: usize,
    pub l: usize,
    pub levels: usize,
    pub mesh: MeshKind,
    /// Cell count of the coarsest level; each level has four times as many.
    pub cells: usize,
    pub seed: u64,
    pub quad_bump: usize,
    pub lloyd_iters: usize,
    /// One mesh per level, replacing the generated sequence.
    pub mesh_files: Vec<PathBuf>,
    /// One `F_h` DoF file per level, replacing the interpolated map.
    pub map_files: Vec<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            case: CaseKind::Annulus,
            method: "physical".into(),
            k: 1,
            l: 1,
            levels: 5,
            mesh: MeshKind::Voronoi,
            cells: 64,
            seed: 2,
            quad_bump: 0,
            lloyd_iters: DEFAULT_LLOYD_ITERS,
            mesh_files: Vec::new(),
            map_files: Vec::new(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("level {level}: {source}")]
    Mesh { level: usize, source: MeshError },
    #[error("level {level}: {source}")]
    Map { level: usize, source: MapError },
    #[error("level {level}: {source}")]
    Method { level: usize, source: MethodError },
    #[error("level {level}: {msg}")]
    Invariant { level: usize, msg: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Registry(#[from] MethodError),
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.k == 0 || self.l == 0 {
            return Err(StudyError::Config("degrees k and l must be at least 1".into()));
        }
        if self.levels == 0 {
            return Err(StudyError::Config("at least one level is required".into()));
        }
        if self.cells == 0 {
            return Err(StudyError::Config("cell count must be positive".into()));
        }
        if !self.mesh_files.is_empty() && self.mesh_files.len() != self.levels {
            return Err(StudyError::Config(format!(
                "{} mesh files given for {} levels",
                self.mesh_files.len(),
                self.levels
            )));
        }
        if !self.map_files.is_empty() && self.map_files.len() != self.levels {
            return Err(StudyError::Config(format!(
                "{} map files given for {} levels",
                self.map_files.len(),
                self.levels
            )));
        }
        Ok(())
    }
}

/// Mesh of one level of the configured sequence.
pub fn level_mesh(cfg: &StudyConfig, level: usize) -> Result<PolygonalMesh, StudyError> {
    let wrap = |source| StudyError::Mesh { level, source };
    if let Some(path) = cfg.mesh_files.get(level) {
        return load_mesh(path).map_err(wrap);
    }
    let cells = cfg.cells * 4usize.pow(level as u32);
    let side = ((cells as f64).sqrt().round() as usize).max(1);
    match cfg.mesh {
        MeshKind::Voronoi => generate_voronoi_cvt(cells, cfg.lloyd_iters, level_seed(cfg.seed, level)).map_err(wrap),
        MeshKind::Quads => generate_structured(StructuredKind::Quads, side, 0).map_err(wrap),
        MeshKind::Perturbed => {
            generate_structured(StructuredKind::PerturbedQuads, side, level_seed(cfg.seed, level)).map_err(wrap)
        }
    }
}

fn level_seed(seed: u64, level: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(level as u64)
}

/// Diagnostics of one solved level.
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub record: ErrorRecord,
    pub residual: f64,
    pub skew_defect: f64,
    pub clamped_cells: usize,
    /// Symmetric part of the reduced matrix factorised by Cholesky.
    pub coercive: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub levels: Vec<LevelReport>,
}

impl StudyReport {
    pub fn records(&self) -> Vec<ErrorRecord> {
        self.levels.iter().map(|l| l.record.clone()).collect()
    }
}

pub const SKEW_TOL: f64 = 1e-12;

/// Largest `|vᵀBv| / ‖v‖²` over a few pseudo-random vectors.
pub fn skew_defect(b: &crate::methods::CsrMatrix, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..3)
        .map(|_| {
            let v: Vec<f64> = (0..b.ncols()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n2: f64 = v.iter().map(|x| x * x).sum();
            b.quad_form(&v).abs() / n2
        })
        .fold(0.0, f64::max)
}

/// Prepares the method for one mesh and case.
pub fn prepare_level(
    registry: &MethodRegistry,
    case: &TestCase,
    cfg: &StudyConfig,
    mesh: Arc<PolygonalMesh>,
    level: usize,
) -> Result<Box<dyn PreparedMethod>, StudyError> {
    let method = registry.get(&cfg.method)?;
    let map: Option<Arc<VirtualMap>> = if cfg.method == "curved" {
        None
    } else if let Some(path) = cfg.map_files.get(level) {
        let m = load_map(path, &mesh).map_err(|source| StudyError::Map { level, source })?;
        if m.l != cfg.l {
            return Err(StudyError::Config(format!("map file has degree {}, expected {}", m.l, cfg.l)));
        }
        Some(Arc::new(m))
    } else {
        Some(Arc::new(interpolate_map(case.map.as_ref(), &mesh, cfg.l)))
    };
    let ctx = MethodContext {
        mesh,
        k: cfg.k,
        analytic: case.map.clone(),
        map,
        quad_bump: cfg.quad_bump,
    };
    method.prepare(&ctx).map_err(|source| StudyError::Method { level, source })
}

/// Runs one level: prepare, assemble, impose the exact trace, solve, measure.
pub fn run_level(
    registry: &MethodRegistry,
    case: &TestCase,
    cfg: &StudyConfig,
    mesh: PolygonalMesh,
    level: usize,
) -> Result<LevelReport, StudyError> {
    let start = Instant::now();
    let h = mesh.h_max();
    let at = |source| StudyError::Method { level, source };
    let method = prepare_level(registry, case, cfg, Arc::new(mesh), level)?;
    let problem = &case.problem;
    let (u, grad_u) = match (&problem.u, &problem.grad_u) {
        (Some(u), Some(g)) => (u.clone(), g.clone()),
        _ => return Err(StudyError::Config("the case has no exact solution".into())),
    };
    let verts: Vec<_> = (0..method.mesh().num_cells())
        .flat_map(|c| method.vertex_points(c).to_vec())
        .collect();
    let check = problem.check_data(&verts).map_err(at)?;
    if check.negative_mu > 0 {
        log::warn!(
            "level {level}: c - div(b)/2 is negative at {} vertex samples (min {:.3e})",
            check.negative_mu,
            check.min_mu
        );
    }
    let system = assemble(method.as_ref(), problem).map_err(at)?;
    let skew = skew_defect(&system.convection, level as u64);
    if skew > SKEW_TOL {
        return Err(StudyError::Invariant {
            level,
            msg: format!("convection form is not skew-symmetric: {skew:e}"),
        });
    }
    let g = |p| u(p);
    let values = boundary_values(method.as_ref(), &g);
    let reduced = apply_dirichlet(&system, &values);
    let coercive = reduced.matrix.symmetric_part_is_positive_definite();
    if !coercive {
        log::warn!("level {level}: symmetric part of the system matrix is not positive definite");
    }
    let sol = solve(method.as_ref(), &reduced).map_err(at)?;
    let errors = solution_errors(method.as_ref(), &sol, &u, &grad_u, method.assembly_degree() + 2).map_err(at)?;
    Ok(LevelReport {
        record: ErrorRecord::new(level, h, system.layout.total(), errors),
        residual: sol.residual,
        skew_defect: skew,
        clamped_cells: system.clamped_cells,
        coercive,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the full study on the current rayon pool.
pub fn run_study(cfg: &StudyConfig, registry: &MethodRegistry) -> Result<StudyReport, StudyError> {
    cfg.validate()?;
    registry.get(&cfg.method)?;
    let case = TestCase::new(cfg.case);
    let mut levels = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels {
        let mesh = level_mesh(cfg, level)?;
        log::info!("level {level}: {} cells", mesh.num_cells());
        levels.push(run_level(registry, &case, cfg, mesh, level)?);
    }
    let mut records: Vec<ErrorRecord> = levels.iter().map(|l| l.record.clone()).collect();
    fill_eoc(&mut records)?;
    for (l, r) in levels.iter_mut().zip(records) {
        l.record = r;
    }
    Ok(StudyReport {
        config: cfg.clone(),
        levels,
    })
}

/// Runs `f` on a pool capped by `ISOVEM_THREADS` when it is set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match std::env::var("ISOVEM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool: {e}");
                f()
            }
        },
        _ => f(),
    }
}
