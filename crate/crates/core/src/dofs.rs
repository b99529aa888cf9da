//! Global DOF numbering with boundary DOFs first.
//!
//! Boundary DOFs follow the boundary chain: each chain vertex, then the
//! interior points of the edge leaving it. The remaining DOFs are numbered
//! cell by cell: unseen vertices, unseen edge points, then the cell's
//! moments.

use nalgebra::Point2;

use crate::mesh::PolygonalMesh;
use crate::vemspace::{edge_nodes, DofLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Vertex(usize),
    /// Point `j` of mesh edge `edge`, counted from `MeshEdge::vertices[0]`.
    EdgePoint { edge: usize, j: usize },
    Moment { cell: usize, index: usize },
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub k: usize,
    pub n_dofs: usize,
    pub n_boundary: usize,
    /// Local-to-global map per cell, in the local layout order.
    pub cell_dofs: Vec<Vec<usize>>,
    pub vertex_dof: Vec<usize>,
    /// `k - 1` DOFs per mesh edge, ordered from `vertices[0]` to `vertices[1]`.
    pub edge_dofs: Vec<Vec<usize>>,
    pub kinds: Vec<DofKind>,
    /// Location of every point DOF; `None` for moments.
    pub points: Vec<Option<Point2<f64>>>,
}

impl DofMap {
    pub fn is_boundary(&self, dof: usize) -> bool {
        dof < self.n_boundary
    }

    pub fn n_interior(&self) -> usize {
        self.n_dofs - self.n_boundary
    }
}

pub fn number_dofs(mesh: &PolygonalMesh, k: usize) -> DofMap {
    assert!(k >= 1);
    const UNSET: usize = usize::MAX;
    let nodes = edge_nodes(k);
    let mut vertex_dof = vec![UNSET; mesh.n_vertices()];
    let mut edge_dofs: Vec<Vec<usize>> = vec![Vec::new(); mesh.edges().len()];
    let mut kinds = Vec::new();
    let mut points = Vec::new();
    let verts = mesh.vertices();

    let add_vertex = |v: usize, vertex_dof: &mut Vec<usize>, kinds: &mut Vec<DofKind>, points: &mut Vec<Option<Point2<f64>>>| {
        if vertex_dof[v] == UNSET {
            vertex_dof[v] = kinds.len();
            kinds.push(DofKind::Vertex(v));
            points.push(Some(verts[v]));
        }
    };
    // Assigns the edge's points so that they run from `from` to `to`.
    let add_edge = |e: usize, from: usize, edge_dofs: &mut Vec<Vec<usize>>, kinds: &mut Vec<DofKind>, points: &mut Vec<Option<Point2<f64>>>| {
        if k < 2 || !edge_dofs[e].is_empty() {
            return;
        }
        let [a, b] = mesh.edges()[e].vertices;
        let mut ids: Vec<usize> = (0..k - 1).map(|i| kinds.len() + i).collect();
        let (p, q) = if from == a { (a, b) } else { (b, a) };
        for (i, &t) in nodes[1..k].iter().enumerate() {
            let canonical = if from == a { i } else { k - 2 - i };
            kinds.push(DofKind::EdgePoint { edge: e, j: canonical });
            points.push(Some(verts[p] + (verts[q] - verts[p]) * t));
        }
        if from != a {
            ids.reverse();
        }
        edge_dofs[e] = ids;
    };

    for be in mesh.boundary_edges() {
        add_vertex(be.from, &mut vertex_dof, &mut kinds, &mut points);
        add_edge(be.edge, be.from, &mut edge_dofs, &mut kinds, &mut points);
    }
    let n_boundary = kinds.len();

    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());
    let n_moments = k * (k - 1) / 2;
    for (c, cell) in mesh.cells().iter().enumerate() {
        for &v in cell {
            add_vertex(v, &mut vertex_dof, &mut kinds, &mut points);
        }
        for (i, le) in mesh.cell_edges(c).iter().enumerate() {
            add_edge(le.edge, cell[i], &mut edge_dofs, &mut kinds, &mut points);
        }
        let layout = DofLayout::new(k, cell.len());
        let mut map = vec![UNSET; layout.n_dofs()];
        for (i, &v) in cell.iter().enumerate() {
            map[layout.vertex(i)] = vertex_dof[v];
        }
        for (e, le) in mesh.cell_edges(c).iter().enumerate() {
            for j in 0..k - 1 {
                let canonical = if le.forward { j } else { k - 2 - j };
                map[layout.edge_point(e, j)] = edge_dofs[le.edge][canonical];
            }
        }
        for a in 0..n_moments {
            map[layout.moment(a)] = kinds.len();
            kinds.push(DofKind::Moment { cell: c, index: a });
            points.push(None);
        }
        debug_assert!(map.iter().all(|&d| d != UNSET));
        cell_dofs.push(map);
    }

    DofMap {
        k,
        n_dofs: kinds.len(),
        n_boundary,
        cell_dofs,
        vertex_dof,
        edge_dofs,
        kinds,
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_l_shaped_quad_mesh, build_structured_quad_mesh, Rectangle};
    use crate::vemspace::dof_points;

    #[test]
    fn table_counts() {
        let m2 = build_structured_quad_mesh(Rectangle::UNIT, 2, 2).unwrap();
        let m4 = build_structured_quad_mesh(Rectangle::UNIT, 4, 4).unwrap();
        assert_eq!(number_dofs(&m2, 1).n_dofs, 9);
        assert_eq!(number_dofs(&m4, 1).n_dofs, 25);
        assert_eq!(number_dofs(&m2, 3).n_dofs, 45);
        assert_eq!(number_dofs(&m4, 3).n_dofs, 153);
        let d = number_dofs(&m2, 1);
        assert_eq!((d.n_boundary, d.n_interior()), (8, 1));
        let d = number_dofs(&m2, 3);
        assert_eq!(d.n_boundary, 24);
    }

    #[test]
    fn single_square_k2() {
        let m = build_structured_quad_mesh(Rectangle::UNIT, 1, 1).unwrap();
        let d = number_dofs(&m, 2);
        assert_eq!((d.n_dofs, d.n_boundary), (9, 8));
        assert!(matches!(d.kinds[8], DofKind::Moment { cell: 0, index: 0 }));
    }

    #[test]
    fn structured_k2_formula() {
        for n in [1, 3, 8] {
            let m = build_structured_quad_mesh(Rectangle::UNIT, n, n).unwrap();
            assert_eq!(number_dofs(&m, 2).n_dofs, (2 * n + 1) * (2 * n + 1));
        }
    }

    #[test]
    fn local_maps_agree_with_point_locations() {
        let m = build_l_shaped_quad_mesh(2).unwrap();
        for k in 1..=4 {
            let d = number_dofs(&m, k);
            for c in 0..m.n_cells() {
                let pts = dof_points(m.element_geometry(c), k);
                for (local, p) in pts.iter().enumerate() {
                    let q = d.points[d.cell_dofs[c][local]].unwrap();
                    assert!((p - q).norm() < 1e-14, "k={k} cell {c} local {local}");
                }
            }
        }
    }

    #[test]
    fn boundary_dofs_lie_on_boundary() {
        let m = build_l_shaped_quad_mesh(2).unwrap();
        let d = number_dofs(&m, 3);
        let on_boundary = |p: Point2<f64>| {
            let eps = 1e-12;
            p.x.abs() < eps
                || p.y.abs() < eps
                || (p.x - 2.0).abs() < eps && p.y <= 0.5 + eps
                || (p.y - 2.0).abs() < eps && p.x <= 0.5 + eps
                || (p.x - 0.5).abs() < eps && p.y >= 0.5 - eps
                || (p.y - 0.5).abs() < eps && p.x >= 0.5 - eps
        };
        for i in 0..d.n_dofs {
            match d.points[i] {
                Some(p) => assert_eq!(on_boundary(p), d.is_boundary(i), "dof {i} at {p}"),
                None => assert!(!d.is_boundary(i)),
            }
        }
    }
}
