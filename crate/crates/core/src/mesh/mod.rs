//! Polygonal tessellations of a simply connected polygonal domain.
//!
//! Cells are stored counterclockwise. The boundary chain is derived from the
//! cells, never read from input, and is traversed with the domain on the
//! left, starting at the lexicographically smallest boundary vertex. That
//! start point is always a corner of the domain, so two different meshes of
//! the same domain share it.

mod generate;
mod io;
mod locate;
mod quality;

use std::collections::HashMap;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{build_l_shaped_quad_mesh, build_structured_quad_mesh, Rectangle};
pub use io::{load_mesh, parse_json_mesh, parse_off_mesh, write_json_mesh, MeshFormat, MeshFile};
pub use locate::CellLocator;
#[cfg(test)]
pub(crate) use locate::polygon_contains;
pub use quality::{validate_mesh_assumptions, CellQuality, QualityReport};

/// Geometric data of one straight edge of an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    pub start: Point2<f64>,
    pub end: Point2<f64>,
    pub length: f64,
    /// Unit outward normal.
    pub normal: Vector2<f64>,
    /// Unit tangent `(n2, -n1)`; for a counterclockwise cell this runs clockwise.
    pub tangent: Vector2<f64>,
}

impl EdgeGeometry {
    pub fn new(start: Point2<f64>, end: Point2<f64>) -> Self {
        let d = end - start;
        let length = d.norm();
        let t = d / length;
        let normal = Vector2::new(t.y, -t.x);
        Self {
            start,
            end,
            length,
            normal,
            tangent: Vector2::new(normal.y, -normal.x),
        }
    }

    pub fn point_at(&self, t: f64) -> Point2<f64> {
        self.start + (self.end - self.start) * t
    }
}

/// Cached geometry of a polygonal cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub vertices: Vec<Point2<f64>>,
    pub centroid: Point2<f64>,
    pub diameter: f64,
    pub area: f64,
    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub edges: Vec<EdgeGeometry>,
}

/// Signed area by the shoelace formula.
pub fn signed_area(vertices: &[Point2<f64>]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

impl ElementGeometry {
    /// Geometry of a counterclockwise polygon.
    pub fn from_vertices(vertices: Vec<Point2<f64>>) -> Self {
        let n = vertices.len();
        let area = signed_area(&vertices);
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let cross = a.x * b.y - b.x * a.y;
            cx += (a.x + b.x) * cross;
            cy += (a.y + b.y) * cross;
        }
        let centroid = Point2::new(cx / (6.0 * area), cy / (6.0 * area));
        let mut diameter: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                diameter = diameter.max((vertices[i] - vertices[j]).norm());
            }
        }
        let edges = (0..n)
            .map(|i| EdgeGeometry::new(vertices[i], vertices[(i + 1) % n]))
            .collect();
        Self {
            vertices,
            centroid,
            diameter,
            area,
            edges,
        }
    }

    pub fn n_edges(&self) -> usize {
        self.vertices.len()
    }

    pub fn perimeter(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }
}

/// A mesh edge; `vertices[0] < vertices[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshEdge {
    pub vertices: [usize; 2],
    /// Adjacent cells; `cells[1]` is `None` on the boundary.
    pub cells: [usize; 2],
    pub is_boundary: bool,
}

/// Reference from a cell's local edge to the global edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalEdge {
    pub edge: usize,
    /// True when the local direction (vertex `i` to `i + 1`) agrees with
    /// `MeshEdge::vertices[0] -> vertices[1]`.
    pub forward: bool,
}

/// One step of the boundary chain, directed with the domain on the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub from: usize,
    pub to: usize,
    pub cell: usize,
    pub edge: usize,
}

#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Point2<f64>>,
    cells: Vec<Vec<usize>>,
    geometry: Vec<ElementGeometry>,
    edges: Vec<MeshEdge>,
    cell_edges: Vec<Vec<LocalEdge>>,
    boundary_edges: Vec<BoundaryEdge>,
    mesh_size: f64,
}

fn segments_intersect(p1: Point2<f64>, p2: Point2<f64>, q1: Point2<f64>, q2: Point2<f64>) -> bool {
    let orient = |a: Point2<f64>, b: Point2<f64>, c: Point2<f64>| (b - a).perp(&(c - a));
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

impl PolygonalMesh {
    /// Builds and validates a mesh. Clockwise cells are reversed with a warning.
    pub fn new(vertices: Vec<Point2<f64>>, mut cells: Vec<Vec<usize>>) -> Result<Self> {
        if vertices.is_empty() || cells.is_empty() {
            return Err(Error::NonConforming("mesh has no vertices or no cells".into()));
        }
        let nv = vertices.len();
        let (mut lo, mut hi) = (vertices[0], vertices[0]);
        for v in &vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        let extent = (hi - lo).norm();
        let area_tol = 1e-14 * extent * extent;

        let mut geometry = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.len() < 3 {
                return Err(Error::DegenerateCell {
                    cell: c,
                    reason: format!("{} vertices", cell.len()),
                });
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= nv) {
                return Err(Error::NonConforming(format!("cell {c} references missing vertex {bad}")));
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DegenerateCell {
                    cell: c,
                    reason: "repeated vertex".into(),
                });
            }
            let pts: Vec<_> = cell.iter().map(|&v| vertices[v]).collect();
            let area = signed_area(&pts);
            if area.abs() <= area_tol {
                return Err(Error::DegenerateCell {
                    cell: c,
                    reason: "zero area".into(),
                });
            }
            if area < 0.0 {
                log::warn!("cell {c} is clockwise; reversing its vertex order");
                cell.reverse();
            }
            let pts: Vec<_> = cell.iter().map(|&v| vertices[v]).collect();
            let n = pts.len();
            for i in 0..n {
                for j in i + 2..n {
                    if i == 0 && j == n - 1 {
                        continue;
                    }
                    if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                        return Err(Error::DegenerateCell {
                            cell: c,
                            reason: "self-intersecting polygon".into(),
                        });
                    }
                }
            }
            let geom = ElementGeometry::from_vertices(pts);
            if let Some(i) = geom.edges.iter().position(|e| e.length <= 1e-14 * extent) {
                return Err(Error::DegenerateCell {
                    cell: c,
                    reason: format!("edge {i} has zero length"),
                });
            }
            geometry.push(geom);
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<MeshEdge> = Vec::new();
        let mut uses: Vec<Vec<(usize, bool)>> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (cell[i], cell[(i + 1) % n]);
                let key = (a.min(b), a.max(b));
                let forward = a < b;
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(MeshEdge {
                        vertices: [key.0, key.1],
                        cells: [c, usize::MAX],
                        is_boundary: true,
                    });
                    uses.push(Vec::new());
                    edges.len() - 1
                });
                uses[e].push((c, forward));
                local.push(LocalEdge { edge: e, forward });
            }
            cell_edges.push(local);
        }
        for (e, u) in uses.iter().enumerate() {
            match u.as_slice() {
                [_] => {}
                [(c0, f0), (c1, f1)] => {
                    if f0 == f1 {
                        return Err(Error::NonConforming(format!(
                            "edge {:?} traversed in the same direction by cells {c0} and {c1}",
                            edges[e].vertices
                        )));
                    }
                    edges[e].cells = [*c0, *c1];
                    edges[e].is_boundary = false;
                }
                more => {
                    return Err(Error::NonConforming(format!(
                        "edge {:?} shared by {} cells",
                        edges[e].vertices,
                        more.len()
                    )))
                }
            }
        }

        let mut referenced = vec![false; nv];
        cells.iter().flatten().for_each(|&v| referenced[v] = true);
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(Error::NonConforming(format!("vertex {v} is not used by any cell")));
        }

        // Boundary chain: directed edges as they appear in their (ccw) cell.
        let mut next: HashMap<usize, BoundaryEdge> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            for (i, le) in cell_edges[c].iter().enumerate() {
                if edges[le.edge].is_boundary {
                    let be = BoundaryEdge {
                        from: cell[i],
                        to: cell[(i + 1) % n],
                        cell: c,
                        edge: le.edge,
                    };
                    if next.insert(be.from, be).is_some() {
                        return Err(Error::NonConforming(format!(
                            "boundary vertex {} starts two boundary edges (pinched or hanging vertex)",
                            be.from
                        )));
                    }
                }
            }
        }
        let start = *next
            .keys()
            .min_by(|&&a, &&b| {
                let (pa, pb) = (vertices[a], vertices[b]);
                pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y))
            })
            .ok_or_else(|| Error::NonConforming("mesh has no boundary".into()))?;
        let mut boundary_edges = Vec::with_capacity(next.len());
        let mut v = start;
        loop {
            let be = *next
                .get(&v)
                .ok_or_else(|| Error::NonConforming(format!("open boundary chain at vertex {v}")))?;
            boundary_edges.push(be);
            v = be.to;
            if v == start || boundary_edges.len() > next.len() {
                break;
            }
        }
        if v != start || boundary_edges.len() != next.len() {
            return Err(Error::NonConforming(format!(
                "boundary is not a single closed chain ({} of {} boundary edges reachable; hanging vertex or hole?)",
                boundary_edges.len(),
                next.len()
            )));
        }

        let cell_area: f64 = geometry.iter().map(|g| g.area).sum();
        let chain_pts: Vec<_> = boundary_edges.iter().map(|b| vertices[b.from]).collect();
        let domain_area = signed_area(&chain_pts);
        if (cell_area - domain_area).abs() > 1e-10 * domain_area.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NonConforming(format!(
                "cell areas sum to {cell_area} but the boundary encloses {domain_area} (overlapping cells?)"
            )));
        }

        let mesh_size = geometry.iter().map(|g| g.diameter).fold(0.0, f64::max);
        Ok(Self {
            vertices,
            cells,
            geometry,
            edges,
            cell_edges,
            boundary_edges,
            mesh_size,
        })
    }

    pub fn vertices(&self) -> &[Point2<f64>] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn cell_edges(&self, cell: usize) -> &[LocalEdge] {
        &self.cell_edges[cell]
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// `h`: the largest cell diameter.
    pub fn mesh_size(&self) -> f64 {
        self.mesh_size
    }

    pub fn element_geometry(&self, cell: usize) -> &ElementGeometry {
        &self.geometry[cell]
    }

    pub fn geometries(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    pub fn area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    /// Boundary polygon vertices in chain order.
    pub fn boundary_polygon(&self) -> Vec<Point2<f64>> {
        self.boundary_edges.iter().map(|b| self.vertices[b.from]).collect()
    }

    /// Same vertex coordinates and cell lists.
    pub fn same_as(&self, other: &PolygonalMesh) -> bool {
        self.cells == other.cells && self.vertices == other.vertices
    }
}

/// Serializable snapshot of mesh statistics.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeshSummary {
    pub vertices: usize,
    pub cells: usize,
    pub boundary_edges: usize,
    pub h: f64,
}

impl From<&PolygonalMesh> for MeshSummary {
    fn from(m: &PolygonalMesh) -> Self {
        Self {
            vertices: m.n_vertices(),
            cells: m.n_cells(),
            boundary_edges: m.boundary_edges().len(),
            h: m.mesh_size(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    #[test]
    fn unit_square_geometry() {
        let g = ElementGeometry::from_vertices(vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)]);
        assert_relative_eq!(g.centroid, p(0.5, 0.5), epsilon = 1e-15);
        assert_relative_eq!(g.diameter, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.area, 1.0, epsilon = 1e-15);
        // bottom edge: outward normal points down, tangent (n2, -n1) points left
        assert_relative_eq!(g.edges[0].normal, Vector2::new(0.0, -1.0), epsilon = 1e-15);
        assert_relative_eq!(g.edges[0].tangent, Vector2::new(-1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn right_triangle_geometry() {
        let g = ElementGeometry::from_vertices(vec![p(0., 0.), p(1., 0.), p(0., 1.)]);
        assert_relative_eq!(g.area, 0.5, epsilon = 1e-15);
        assert_relative_eq!(g.diameter, 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.centroid, p(1. / 3., 1. / 3.), epsilon = 1e-15);
    }

    #[test]
    fn hexagon_area_matches_shoelace_oracle() {
        let verts: Vec<_> = (0..6)
            .map(|i| {
                let t = std::f64::consts::PI / 3.0 * i as f64;
                p(t.cos(), t.sin())
            })
            .collect();
        // independent triangle-sum oracle from the center
        let oracle: f64 = (0..6)
            .map(|i| {
                let a = verts[i];
                let b = verts[(i + 1) % 6];
                0.5 * (a.x * b.y - a.y * b.x)
            })
            .sum();
        let g = ElementGeometry::from_vertices(verts);
        assert_relative_eq!(g.area, 3.0 * 3f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(g.area, oracle, epsilon = 1e-14);
        let closure = g.edges.iter().fold(Vector2::zeros(), |acc, e| acc + e.normal * e.length);
        assert!(closure.norm() < 1e-14);
    }

    #[test]
    fn clockwise_cell_is_reversed() {
        let m = PolygonalMesh::new(vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)], vec![vec![0, 3, 2, 1]]).unwrap();
        assert!(m.element_geometry(0).area > 0.0);
        assert_eq!(m.boundary_edges().len(), 4);
    }

    #[test]
    fn zero_area_cell_is_rejected() {
        let err = PolygonalMesh::new(vec![p(0., 0.), p(1., 0.), p(2., 0.)], vec![vec![0, 1, 2]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateCell { .. }));
    }

    #[test]
    fn hanging_vertex_is_rejected() {
        // left cell has edge (1,0)-(1,1); right side split at (1, 0.5)
        let verts = vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.), p(2., 0.), p(2., 1.), p(1., 0.5), p(2., 0.5)];
        let cells = vec![vec![0, 1, 2, 3], vec![1, 4, 7, 6], vec![6, 7, 5, 2]];
        let err = PolygonalMesh::new(verts, cells).unwrap_err();
        assert!(matches!(err, Error::NonConforming(_)), "{err}");
    }

    #[test]
    fn self_intersecting_cell_is_rejected() {
        let verts = vec![p(0., 0.), p(1., 1.), p(1., 0.), p(0., 1.)];
        assert!(PolygonalMesh::new(verts, vec![vec![0, 1, 2, 3]]).is_err());
    }
}
