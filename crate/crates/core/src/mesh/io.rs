//! Plain-text mesh files.
//!
//! ```text
//! vem-mesh v1
//! vertices <n>
//! <x> <y>            (n lines)
//! cells <m>
//! <i0> <i1> ...      (m lines, CCW, 0-based)
//! boundary <k>
//! <i>                (k lines)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::PolygonalMesh;
use crate::error::{Error, Result};
use crate::geometry::{signed_area, Point2};

const HEADER: &str = "vem-mesh v1";

/// Serializes a mesh. Coordinates use the shortest round-trip representation.
pub fn write_mesh(mesh: &PolygonalMesh) -> String {
    let mut s = String::new();
    s.push_str(HEADER);
    s.push('\n');
    let _ = writeln!(s, "vertices {}", mesh.vertices().len());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:?} {:?}", p.x, p.y);
    }
    let _ = writeln!(s, "cells {}", mesh.cells().len());
    for c in mesh.cells() {
        let line: Vec<String> = c.vertex_ids.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    let bnd: Vec<usize> = (0..mesh.dof_count()).filter(|&v| mesh.is_boundary(v)).collect();
    let _ = writeln!(s, "boundary {}", bnd.len());
    for v in bnd {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn save_mesh(mesh: &PolygonalMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_mesh(mesh)).map_err(|e| Error::io(path, e))
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text, path)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    path: &'a Path,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim())
            }
            None => {
                self.line += 1;
                Err(self.err(format!("unexpected end of file, expected {what}")))
            }
        }
    }

    fn section(&mut self, keyword: &str) -> Result<usize> {
        let l = self.next(keyword)?;
        let mut it = l.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(self.err(format!("expected `{keyword} <count>`, found `{l}`")));
        }
        let n = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| self.err(format!("bad {keyword} count in `{l}`")))?;
        if it.next().is_some() {
            return Err(self.err(format!("trailing tokens in `{l}`")));
        }
        Ok(n)
    }
}

/// Parses mesh text; `path` is only used in error messages.
pub fn parse_mesh(text: &str, path: &Path) -> Result<PolygonalMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        path,
        line: 0,
    };
    let h = lines.next("header")?;
    if h != HEADER {
        return Err(lines.err(format!("expected header `{HEADER}`, found `{h}`")));
    }

    let nv = lines.section("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next("vertex coordinates")?;
        let xy: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| lines.err(format!("bad coordinate in `{l}`: {e}")))?;
        if xy.len() != 2 || !xy.iter().all(|v| v.is_finite()) {
            return Err(lines.err(format!("expected two finite coordinates, found `{l}`")));
        }
        vertices.push(Point2::new(xy[0], xy[1]));
    }

    let nc = lines.section("cells")?;
    let mut cells = Vec::with_capacity(nc);
    for c in 0..nc {
        let l = lines.next("cell connectivity")?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| lines.err(format!("cell {c}: bad vertex index in `{l}`: {e}")))?;
        if ids.len() < 3 {
            return Err(lines.err(format!("cell {c} has {} vertices, need at least 3", ids.len())));
        }
        if let Some(&bad) = ids.iter().find(|&&v| v >= nv) {
            return Err(lines.err(format!(
                "cell {c} references vertex {bad} but only {nv} vertices exist"
            )));
        }
        let pts: Vec<Point2> = ids.iter().map(|&v| vertices[v]).collect();
        let a = signed_area(&pts);
        if !(a > 0.0) {
            return Err(lines.err(format!("cell {c} is not counter-clockwise (signed area {a:e})")));
        }
        cells.push(ids);
    }

    let nb = lines.section("boundary")?;
    let mut boundary = vec![false; nv];
    for _ in 0..nb {
        let l = lines.next("boundary vertex index")?;
        let v: usize = l
            .parse()
            .map_err(|_| lines.err(format!("bad boundary index `{l}`")))?;
        if v >= nv {
            return Err(lines.err(format!("boundary vertex {v} out of range ({nv} vertices)")));
        }
        boundary[v] = true;
    }
    for (i, l) in lines.inner.by_ref() {
        if !l.trim().is_empty() {
            lines.line = i + 1;
            return Err(lines.err("unexpected content after boundary section"));
        }
    }
    PolygonalMesh::new(vertices, cells, Some(boundary))
}
