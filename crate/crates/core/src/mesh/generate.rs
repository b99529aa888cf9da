use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::PolygonalMesh;
use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rectangle {
    pub const UNIT: Rectangle = Rectangle {
        x0: 0.0,
        y0: 0.0,
        x1: 1.0,
        y1: 1.0,
    };
}

fn grid_mesh(domain: Rectangle, nx: usize, ny: usize, keep: impl Fn(usize, usize) -> bool) -> Result<PolygonalMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter("grid needs at least one cell per direction".into()));
    }
    if domain.x1 <= domain.x0 || domain.y1 <= domain.y0 {
        return Err(Error::InvalidParameter("empty rectangle".into()));
    }
    let dx = (domain.x1 - domain.x0) / nx as f64;
    let dy = (domain.y1 - domain.y0) / ny as f64;
    let mut id = vec![usize::MAX; (nx + 1) * (ny + 1)];
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    let mut vid = |i: usize, j: usize, vertices: &mut Vec<Point2<f64>>| {
        let slot = &mut id[j * (nx + 1) + i];
        if *slot == usize::MAX {
            *slot = vertices.len();
            // pin the far edges exactly to the rectangle
            let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * dx };
            let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * dy };
            vertices.push(Point2::new(x, y));
        }
        *slot
    };
    for j in 0..ny {
        for i in 0..nx {
            if keep(i, j) {
                let a = vid(i, j, &mut vertices);
                let b = vid(i + 1, j, &mut vertices);
                let c = vid(i + 1, j + 1, &mut vertices);
                let d = vid(i, j + 1, &mut vertices);
                cells.push(vec![a, b, c, d]);
            }
        }
    }
    PolygonalMesh::new(vertices, cells)
}

/// Structured mesh of `nx * ny` rectangles.
pub fn build_structured_quad_mesh(domain: Rectangle, nx: usize, ny: usize) -> Result<PolygonalMesh> {
    grid_mesh(domain, nx, ny, |_, _| true)
}

/// Structured quads on `(0, 2)^2 \ [0.5, 2) x [0.5, 2)`; `n` cells span the
/// short side of length 0.5, so the cell width is `0.5 / n`.
pub fn build_l_shaped_quad_mesh(n: usize) -> Result<PolygonalMesh> {
    let domain = Rectangle {
        x0: 0.0,
        y0: 0.0,
        x1: 2.0,
        y1: 2.0,
    };
    grid_mesh(domain, 4 * n, 4 * n, |i, j| i < n || j < n)
}
