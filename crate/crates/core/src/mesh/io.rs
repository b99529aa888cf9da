//! Mesh file formats.
//!
//! Native JSON:
//!
//! ```json
//! { "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
//!   "cells": [[0, 1, 2, 3]] }
//! ```
//!
//! OFF-like text: an optional `OFF` header, a counts line `n_vertices n_cells
//! [ignored]`, one `x y [z]` line per vertex, then one `n i_0 ... i_{n-1}` line
//! per cell. `#` starts a comment.

use std::path::Path;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::PolygonalMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    Json,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Self::Json),
            "off" => Some(Self::Off),
            _ => None,
        }
    }
}

/// On-disk JSON layout.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
}

impl From<&PolygonalMesh> for MeshFile {
    fn from(m: &PolygonalMesh) -> Self {
        Self {
            vertices: m.vertices().iter().map(|p| [p.x, p.y]).collect(),
            cells: m.cells().to_vec(),
        }
    }
}

pub fn parse_json_mesh(text: &str) -> Result<PolygonalMesh> {
    let file: MeshFile = serde_json::from_str(text)?;
    PolygonalMesh::new(
        file.vertices.iter().map(|v| Point2::new(v[0], v[1])).collect(),
        file.cells,
    )
}

pub fn parse_off_mesh(text: &str) -> Result<PolygonalMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();
    if let Some((_, l)) = lines.peek() {
        if l.eq_ignore_ascii_case("off") {
            lines.next();
        }
    }
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let (line, counts) = lines.next().ok_or_else(|| parse_err(0, "missing counts line".into()))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(parse_err(line, "counts line needs vertex and cell counts".into()));
    }
    let (nv, nc) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of vertex list".into()))?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad coordinate {t:?}"))))
            .collect::<Result<_>>()?;
        if xs.len() < 2 {
            return Err(parse_err(line, "vertex needs two coordinates".into()));
        }
        vertices.push(Point2::new(xs[0], xs[1]));
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of cell list".into()))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad index {t:?}"))))
            .collect::<Result<_>>()?;
        let n = *ids.first().ok_or_else(|| parse_err(line, "empty cell line".into()))?;
        if ids.len() != n + 1 {
            return Err(parse_err(line, format!("cell declares {n} vertices but lists {}", ids.len() - 1)));
        }
        cells.push(ids[1..].to_vec());
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(line, "trailing content after cell list".into()));
    }
    PolygonalMesh::new(vertices, cells)
}

/// Reads a mesh; `format` defaults to the file extension.
pub fn load_mesh(path: &Path, format: Option<MeshFormat>) -> Result<PolygonalMesh> {
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| Error::InvalidParameter(format!("cannot infer mesh format of {}", path.display())))?;
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        MeshFormat::Json => parse_json_mesh(&text),
        MeshFormat::Off => parse_off_mesh(&text),
    }
}

pub fn write_json_mesh(mesh: &PolygonalMesh, path: &Path) -> Result<()> {
    let text = serde_json::to_string(&MeshFile::from(mesh))?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn json_single_square() {
        let m = parse_json_mesh(r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]], "cells": [[0,1,2,3]]}"#).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_relative_eq!(m.mesh_size(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn off_two_by_two() {
        let text = "OFF\n# 2x2 quads\n9 4 0\n0 0\n0.5 0\n1 0\n0 0.5\n0.5 0.5\n1 0.5\n0 1\n0.5 1\n1 1\n\
                    4 0 1 4 3\n4 1 2 5 4\n4 3 4 7 6\n4 4 5 8 7\n";
        let m = parse_off_mesh(text).unwrap();
        assert_eq!(m.n_vertices(), 9);
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.boundary_edges().len(), 8);
        assert_relative_eq!(m.mesh_size(), 0.5 * 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn uncovered_edge_is_non_conforming() {
        // two squares touching at a single vertex: the boundary pinches
        let text = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1],[2,1],[2,2],[1,2]],
                       "cells": [[0,1,2,3],[2,4,5,6]]}"#;
        assert!(matches!(parse_json_mesh(text), Err(Error::NonConforming(_))));
    }

    #[test]
    fn malformed_off_reports_line() {
        let err = parse_off_mesh("3 1\n0 0\n1 x\n0 1\n3 0 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_mesh(Path::new("/nonexistent/mesh.json"), None).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/mesh.json"));
    }
}
