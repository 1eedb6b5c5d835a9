use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MeshError, PolygonalMesh};
use crate::geometry::Point2;

const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Text,
    Json,
}

#[derive(Serialize, Deserialize)]
struct JsonMesh {
    vertices: Vec<[f64; 2]>,
    cells: Vec<Vec<usize>>,
}

/// Reads a mesh file; JSON is detected by a leading `{`.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

pub fn parse_mesh(text: &str) -> Result<PolygonalMesh, MeshError> {
    let (vertices, cells) = if text.trim_start().starts_with('{') {
        let m: JsonMesh = serde_json::from_str(text)?;
        let v = m.vertices.iter().map(|p| Point2::new(p[0], p[1])).collect();
        (v, m.cells)
    } else {
        parse_text(text)?
    };
    let (vertices, cells) = dedup_vertices(vertices, cells);
    PolygonalMesh::new(vertices, cells)
}

fn parse_text(text: &str) -> Result<(Vec<Point2>, Vec<Vec<usize>>), MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: &str| MeshError::Parse {
        line,
        msg: msg.to_string(),
    };
    let mut next = |what: &str| lines.next().ok_or_else(|| err(0, &format!("unexpected end of file, expected {what}")));

    let (ln, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["VEMMESH", "1"] {
        return Err(err(ln, "expected header `VEMMESH 1`"));
    }
    let count = |ln: usize, line: &str, tag: &str| -> Result<usize, MeshError> {
        let mut it = line.split_whitespace();
        if it.next() != Some(tag) {
            return Err(err(ln, &format!("expected `{tag} <count>`")));
        }
        it.next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| err(ln, &format!("invalid {tag} count")))
    };
    let (ln, l) = next("NV")?;
    let nv = count(ln, l, "NV")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = next("vertex")?;
        let xy: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err(ln, "invalid vertex coordinate"))?;
        if xy.len() != 2 {
            return Err(err(ln, "vertex line needs exactly two coordinates"));
        }
        vertices.push(Point2::new(xy[0], xy[1]));
    }
    let (ln, l) = next("NC")?;
    let nc = count(ln, l, "NC")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = next("cell")?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| err(ln, "invalid cell index"))?;
        if ids.is_empty() || ids[0] + 1 != ids.len() {
            return Err(err(ln, "cell vertex count does not match its index list"));
        }
        cells.push(ids[1..].to_vec());
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after cell section"));
    }
    Ok((vertices, cells))
}

/// Merges vertices closer than the ingestion tolerance and drops unused ones.
fn dedup_vertices(vertices: Vec<Point2>, cells: Vec<Vec<usize>>) -> (Vec<Point2>, Vec<Vec<usize>>) {
    let key = |p: Point2| ((p.x / DEDUP_TOL).floor() as i64, (p.y / DEDUP_TOL).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept: Vec<Point2> = Vec::with_capacity(vertices.len());
    let mut used = vec![false; vertices.len()];
    for &v in cells.iter().flatten() {
        if v < used.len() {
            used[v] = true;
        }
    }
    for (i, &p) in vertices.iter().enumerate() {
        if !used[i] {
            continue;
        }
        let (kx, ky) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    if let Some(&j) = list.iter().find(|&&j| kept[j].dist(p) <= DEDUP_TOL) {
                        found = Some(j);
                        break 'search;
                    }
                }
            }
        }
        remap[i] = found.unwrap_or_else(|| {
            kept.push(p);
            grid.entry((kx, ky)).or_default().push(kept.len() - 1);
            kept.len() - 1
        });
    }
    let cells = cells
        .into_iter()
        .map(|c| {
            let mut out: Vec<usize> = c.iter().map(|&v| remap.get(v).copied().unwrap_or(v)).collect();
            out.dedup();
            if out.len() > 1 && out.first() == out.last() {
                out.pop();
            }
            out
        })
        .collect();
    (kept, cells)
}

/// Serializes a mesh in the given format.
pub fn write_mesh(mesh: &PolygonalMesh, format: MeshFormat) -> String {
    match format {
        MeshFormat::Json => {
            let m = JsonMesh {
                vertices: mesh.vertices().iter().map(|p| [p.x, p.y]).collect(),
                cells: mesh.cells().to_vec(),
            };
            serde_json::to_string(&m).expect("mesh serializes")
        }
        MeshFormat::Text => {
            let mut s = String::new();
            s.push_str("VEMMESH 1\n");
            let _ = writeln!(s, "NV {}", mesh.num_vertices());
            for p in mesh.vertices() {
                let _ = writeln!(s, "{:.16e} {:.16e}", p.x, p.y);
            }
            let _ = writeln!(s, "NC {}", mesh.num_cells());
            for c in mesh.cells() {
                let _ = write!(s, "{}", c.len());
                for v in c {
                    let _ = write!(s, " {v}");
                }
                s.push('\n');
            }
            s
        }
    }
}

pub fn save_mesh(mesh: &PolygonalMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => MeshFormat::Json,
        _ => MeshFormat::Text,
    };
    std::fs::write(path, write_mesh(mesh, format))?;
    Ok(())
}
