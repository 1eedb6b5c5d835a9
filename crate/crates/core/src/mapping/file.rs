//! Text format for externally supplied map DoFs.
//!
//! ```text
//! VEMMAP 1
//! L <l>
//! NV <n>
//! <x> <y>                  one line per mesh vertex
//! NE <n>
//! <a> <b> <mx_0> <my_0> ... edge by its vertex pair, l-1 moment pairs
//! NC <n>
//! <c> <mx_0> <my_0> ...    internal moment pairs of cell c
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{MapError, MapSource, VirtualMap};
use crate::geometry::monomial_dim;
use crate::mesh::PolygonalMesh;
use crate::vem_space::{DofLayout, VemFunction};

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>), MapError> {
        for (i, raw) in self.it.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                return Ok((i + 1, line.split_whitespace().collect()));
            }
        }
        Err(MapError::Parse {
            line: 0,
            msg: "unexpected end of file".into(),
        })
    }

    fn header(&mut self, key: &str) -> Result<usize, MapError> {
        let (line, tok) = self.next()?;
        if tok.len() != 2 || tok[0] != key {
            return Err(MapError::Parse {
                line,
                msg: format!("expected `{key} <n>`"),
            });
        }
        num(line, tok[1])
    }
}

fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, MapError> {
    s.parse().map_err(|_| MapError::Parse {
        line,
        msg: format!("invalid number `{s}`"),
    })
}

fn floats(line: usize, tok: &[&str], expected: usize) -> Result<Vec<f64>, MapError> {
    if tok.len() != expected {
        return Err(MapError::Parse {
            line,
            msg: format!("expected {expected} values, found {}", tok.len()),
        });
    }
    let v: Vec<f64> = tok.iter().map(|s| num(line, s)).collect::<Result<_, _>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(MapError::Parse {
            line,
            msg: "non-finite value".into(),
        });
    }
    Ok(v)
}

pub fn parse_map(text: &str, mesh: &PolygonalMesh) -> Result<VirtualMap, MapError> {
    let mut lines = Lines {
        it: text.lines().enumerate(),
    };
    let (line, tok) = lines.next()?;
    if tok != ["VEMMAP", "1"] {
        return Err(MapError::Parse {
            line,
            msg: "missing `VEMMAP 1` header".into(),
        });
    }
    let l = lines.header("L")?;
    if l == 0 {
        return Err(MapError::Parse {
            line,
            msg: "map degree must be at least 1".into(),
        });
    }
    let layout = DofLayout::new(mesh, l);
    let mut x = vec![f64::NAN; layout.total()];
    let mut y = vec![f64::NAN; layout.total()];

    let nv = lines.header("NV")?;
    if nv != mesh.num_vertices() {
        return Err(MapError::Mismatch(format!("{nv} vertices, mesh has {}", mesh.num_vertices())));
    }
    for v in 0..nv {
        let (line, tok) = lines.next()?;
        let p = floats(line, &tok, 2)?;
        x[layout.vertex_dof(v)] = p[0];
        y[layout.vertex_dof(v)] = p[1];
    }

    let edge_of: HashMap<[usize; 2], usize> =
        mesh.edges().iter().enumerate().map(|(e, ed)| (ed.canonical(), e)).collect();
    let ne = lines.header("NE")?;
    for _ in 0..ne {
        let (line, tok) = lines.next()?;
        if tok.len() < 2 {
            return Err(MapError::Parse {
                line,
                msg: "expected an edge vertex pair".into(),
            });
        }
        let (a, b): (usize, usize) = (num(line, tok[0])?, num(line, tok[1])?);
        let e = *edge_of.get(&[a.min(b), a.max(b)]).ok_or_else(|| MapError::Parse {
            line,
            msg: format!("no mesh edge between vertices {a} and {b}"),
        })?;
        let m = floats(line, &tok[2..], 2 * (l - 1))?;
        for j in 0..l - 1 {
            x[layout.edge_dof(e, j)] = m[2 * j];
            y[layout.edge_dof(e, j)] = m[2 * j + 1];
        }
    }

    let nc = lines.header("NC")?;
    let n_int = if l >= 2 { monomial_dim(l - 2) } else { 0 };
    for _ in 0..nc {
        let (line, tok) = lines.next()?;
        if tok.is_empty() {
            continue;
        }
        let c: usize = num(line, tok[0])?;
        if c >= mesh.num_cells() {
            return Err(MapError::Parse {
                line,
                msg: format!("cell index {c} out of range"),
            });
        }
        let m = floats(line, &tok[1..], 2 * n_int)?;
        for a in 0..n_int {
            x[layout.internal_dof(c, a)] = m[2 * a];
            y[layout.internal_dof(c, a)] = m[2 * a + 1];
        }
    }

    if let Some(d) = x.iter().position(|v| v.is_nan()) {
        return Err(MapError::Mismatch(format!("map DoF {d} was not provided")));
    }
    Ok(VirtualMap {
        l,
        x: VemFunction { k: l, dofs: x },
        y: VemFunction { k: l, dofs: y },
        source: MapSource::External,
    })
}

pub fn load_map(path: impl AsRef<Path>, mesh: &PolygonalMesh) -> Result<VirtualMap, MapError> {
    parse_map(&std::fs::read_to_string(path)?, mesh)
}

pub fn write_map(map: &VirtualMap, mesh: &PolygonalMesh) -> String {
    let l = map.l;
    let layout = DofLayout::new(mesh, l);
    let mut s = String::new();
    let _ = writeln!(s, "VEMMAP 1\nL {l}\nNV {}", mesh.num_vertices());
    for v in 0..mesh.num_vertices() {
        let p = map.vertex(v);
        let _ = writeln!(s, "{:.16e} {:.16e}", p.x, p.y);
    }
    let edges = if l >= 2 { mesh.num_edges() } else { 0 };
    let _ = writeln!(s, "NE {edges}");
    for e in 0..edges {
        let [a, b] = mesh.edges()[e].canonical();
        let _ = write!(s, "{a} {b}");
        for j in 0..l - 1 {
            let d = layout.edge_dof(e, j);
            let _ = write!(s, " {:.16e} {:.16e}", map.x.dofs[d], map.y.dofs[d]);
        }
        s.push('\n');
    }
    let n_int = if l >= 2 { monomial_dim(l - 2) } else { 0 };
    let cells = if n_int > 0 { mesh.num_cells() } else { 0 };
    let _ = writeln!(s, "NC {cells}");
    for c in 0..cells {
        let _ = write!(s, "{c}");
        for a in 0..n_int {
            let d = layout.internal_dof(c, a);
            let _ = write!(s, " {:.16e} {:.16e}", map.x.dofs[d], map.y.dofs[d]);
        }
        s.push('\n');
    }
    s
}
