//! Error norms of discrete solutions, convergence orders and CSV tables.

use std::io::{Read, Write};

use nalgebra::{DVector, Vector2};
use rayon::prelude::*;

use crate::geometry::monomial_dim;
use crate::methods::{MethodError, PreparedMethod, ScalarField, Solution, VectorField};
use crate::vem_space::DofLayout;

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("mesh sizes must strictly decrease (level {0})")]
    NonMonotone(usize),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Broken H¹ seminorm through the gradient projection.
    pub h1: f64,
}

/// `‖u - Π⁰u_h‖` and `|u - u_h|_{h,1}` measured in the physical frame.
pub fn solution_errors(
    method: &dyn PreparedMethod,
    solution: &Solution,
    u: &ScalarField,
    grad_u: &VectorField,
    degree: usize,
) -> Result<ErrorNorms, MethodError> {
    let mesh = method.mesh();
    let layout = DofLayout::new(mesh, method.k());
    let nk1 = monomial_dim(method.k() - 1);
    let (l2, h1) = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let proj = method.projectors(c);
            let local = DVector::from_vec(solution.u.local(&layout.cell_dofs(mesh, c)));
            let c0 = &proj.pi0 * &local;
            let cx = &proj.pi1[0] * &local;
            let cy = &proj.pi1[1] * &local;
            let mut m = vec![0.0; c0.len()];
            let mut acc = (0.0, 0.0);
            for p in method.points(c, degree)? {
                proj.basis.eval_into(p.at, &mut m);
                let v: f64 = m.iter().zip(c0.iter()).map(|(a, b)| a * b).sum();
                let gx: f64 = m[..nk1].iter().zip(cx.iter()).map(|(a, b)| a * b).sum();
                let gy: f64 = m[..nk1].iter().zip(cy.iter()).map(|(a, b)| a * b).sum();
                let gh = p.t * Vector2::new(gx, gy);
                let g = grad_u(p.x);
                let ge = p.m * Vector2::new(g.x, g.y);
                acc.0 += p.weight * (u(p.x) - v).powi(2);
                acc.1 += p.weight * (ge - gh).norm_squared();
            }
            Ok::<_, MethodError>(acc)
        })
        .try_reduce(|| (0.0, 0.0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
    })
}

/// `log(e₀/e₁) / log(h₀/h₁)`.
pub fn eoc(e0: f64, e1: f64, h0: f64, h1: f64) -> f64 {
    (e0 / e1).ln() / (h0 / h1).ln()
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub mesh_index: usize,
    pub h: f64,
    pub ndof: usize,
    pub l2_error: f64,
    pub h1_error: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_h1: Option<f64>,
}

impl ErrorRecord {
    pub fn new(mesh_index: usize, h: f64, ndof: usize, err: ErrorNorms) -> Self {
        Self {
            mesh_index,
            h,
            ndof,
            l2_error: err.l2,
            h1_error: err.h1,
            eoc_l2: None,
            eoc_h1: None,
        }
    }
}

/// Fills the EOC columns from level 1 on.
pub fn fill_eoc(records: &mut [ErrorRecord]) -> Result<(), AnalysisError> {
    for i in 1..records.len() {
        let (p, c) = (&records[i - 1], &records[i]);
        if c.h >= p.h {
            return Err(AnalysisError::NonMonotone(i));
        }
        let l2 = eoc(p.l2_error, c.l2_error, p.h, c.h);
        let h1 = eoc(p.h1_error, c.h1_error, p.h, c.h);
        records[i].eoc_l2 = Some(l2);
        records[i].eoc_h1 = Some(h1);
    }
    if let Some(r) = records.first_mut() {
        r.eoc_l2 = None;
        r.eoc_h1 = None;
    }
    Ok(())
}

/// EOCs of the last refinement pair.
pub fn summary_eoc(records: &[ErrorRecord]) -> Option<(f64, f64)> {
    let r = records.last()?;
    Some((r.eoc_l2?, r.eoc_h1?))
}

pub const CSV_HEADER: [&str; 7] = ["mesh_index", "h", "ndof", "l2_error", "h1_error", "eoc_l2", "eoc_h1"];

fn fmt_float(v: f64) -> String {
    format!("{v:.12e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

pub fn write_csv(records: &[ErrorRecord], out: impl Write) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.mesh_index.to_string(),
            fmt_float(r.h),
            r.ndof.to_string(),
            fmt_float(r.l2_error),
            fmt_float(r.h1_error),
            fmt_opt(r.eoc_l2),
            fmt_opt(r.eoc_h1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<ErrorRecord>, AnalysisError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(AnalysisError::Schema(format!("unexpected header {header:?}")));
    }
    let bad = |line: usize, what: &str| AnalysisError::Schema(format!("row {line}: invalid {what}"));
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let f = |j: usize| rec[j].parse::<f64>().map_err(|_| bad(i + 1, CSV_HEADER[j]));
        let opt = |j: usize| -> Result<Option<f64>, AnalysisError> {
            if rec[j].is_empty() {
                Ok(None)
            } else {
                f(j).map(Some)
            }
        };
        out.push(ErrorRecord {
            mesh_index: rec[0].parse().map_err(|_| bad(i + 1, "mesh_index"))?,
            h: f(1)?,
            ndof: rec[2].parse().map_err(|_| bad(i + 1, "ndof"))?,
            l2_error: f(3)?,
            h1_error: f(4)?,
            eoc_l2: opt(5)?,
            eoc_h1: opt(6)?,
        });
    }
    Ok(out)
}

/// Identifies one convergence table in a long-format figure table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesKey {
    pub case: String,
    pub method: String,
    pub k: usize,
    pub l: usize,
}

impl SeriesKey {
    /// Parses `<case>_<method>_k<k>_l<l>` (the CSV file stem).
    pub fn from_stem(stem: &str) -> Option<Self> {
        let parts: Vec<&str> = stem.split('_').collect();
        if parts.len() != 4 {
            return None;
        }
        Some(Self {
            case: parts[0].to_string(),
            method: parts[1].to_string(),
            k: parts[2].strip_prefix('k')?.parse().ok()?,
            l: parts[3].strip_prefix('l')?.parse().ok()?,
        })
    }

    pub fn stem(&self) -> String {
        format!("{}_{}_k{}_l{}", self.case, self.method, self.k, self.l)
    }
}

/// Concatenates convergence tables into one long table keyed by
/// `(case, method, k, l, mesh_index)`.
pub fn write_figure_data(series: &[(SeriesKey, Vec<ErrorRecord>)], out: impl Write) -> Result<usize, AnalysisError> {
    if series.is_empty() {
        return Err(AnalysisError::Schema("no input tables".into()));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["case", "method", "k", "l"];
    header.extend(CSV_HEADER);
    w.write_record(&header)?;
    let mut rows = 0;
    for (key, records) in series {
        for r in records {
            w.write_record([
                key.case.clone(),
                key.method.clone(),
                key.k.to_string(),
                key.l.to_string(),
                r.mesh_index.to_string(),
                fmt_float(r.h),
                r.ndof.to_string(),
                fmt_float(r.l2_error),
                fmt_float(r.h1_error),
                fmt_opt(r.eoc_l2),
                fmt_opt(r.eoc_h1),
            ])?;
            rows += 1;
        }
    }
    w.flush()?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, h: f64, e: f64) -> ErrorRecord {
        ErrorRecord::new(i, h, 10, ErrorNorms { l2: e * e, h1: e })
    }

    #[test]
    fn eoc_of_halved_errors() {
        assert!((eoc(1.0, 0.25, 1.0, 0.5) - 2.0).abs() < 1e-15);
        assert_eq!(eoc(3.0, 3.0, 1.0, 0.5), 0.0);
        let mut r = vec![rec(0, 0.4, 0.1), rec(1, 0.2, 0.05), rec(2, 0.1, 0.025)];
        fill_eoc(&mut r).unwrap();
        assert_eq!(r[0].eoc_h1, None);
        let (l2, h1) = summary_eoc(&r).unwrap();
        assert!((l2 - 2.0).abs() < 1e-12 && (h1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_h_is_rejected() {
        let mut r = vec![rec(0, 0.2, 0.1), rec(1, 0.2, 0.05)];
        assert!(matches!(fill_eoc(&mut r), Err(AnalysisError::NonMonotone(1))));
    }

    #[test]
    fn csv_round_trip_and_header() {
        let mut r = vec![rec(0, 0.4, 0.1), rec(1, 0.2, 0.05)];
        fill_eoc(&mut r).unwrap();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("mesh_index,h,ndof,l2_error,h1_error,eoc_l2,eoc_h1"));
        assert!(lines.next().unwrap().ends_with(",,"));
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert!((back[1].eoc_h1.unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn figure_data_counts_rows() {
        let key = SeriesKey::from_stem("annulus_physical_k2_l3").unwrap();
        assert_eq!((key.k, key.l, key.method.as_str()), (2, 3, "physical"));
        assert_eq!(key.stem(), "annulus_physical_k2_l3");
        let t: Vec<ErrorRecord> = (0..5).map(|i| rec(i, 1.0 / (i + 1) as f64, 0.1)).collect();
        let mut buf = Vec::new();
        let n = write_figure_data(&[(key.clone(), t.clone()), (key, t)], &mut buf).unwrap();
        assert_eq!(n, 10);
        assert!(write_figure_data(&[], Vec::new()).is_err());
        assert!(SeriesKey::from_stem("annulus_physical_k2").is_none());
    }
}
