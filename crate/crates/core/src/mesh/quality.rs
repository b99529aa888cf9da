use serde::{Deserialize, Serialize};

use super::PolygonalMesh;

/// Shape-regularity ratios of a cell, both relative to its diameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellQuality {
    pub cell: usize,
    /// Shortest edge over diameter.
    pub edge_ratio: f64,
    /// Radius of the largest centroid-centred ball inside the kernel of the
    /// polygon, over diameter; zero if the centroid does not see the whole cell.
    pub ball_ratio: f64,
    pub fails_star_shape: bool,
    pub fails_edge_length: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub threshold: f64,
    pub cells: Vec<CellQuality>,
}

impl QualityReport {
    pub fn flagged(&self) -> impl Iterator<Item = &CellQuality> {
        self.cells.iter().filter(|c| c.fails_star_shape || c.fails_edge_length)
    }

    pub fn min_edge_ratio(&self) -> f64 {
        self.cells.iter().map(|c| c.edge_ratio).fold(f64::INFINITY, f64::min)
    }

    pub fn min_ball_ratio(&self) -> f64 {
        self.cells.iter().map(|c| c.ball_ratio).fold(f64::INFINITY, f64::min)
    }
}

/// Checks each cell against the star-shape and edge-length regularity
/// assumptions. Advisory only.
///
/// The ball is centred at the centroid with radius equal to the smallest
/// distance to an edge's supporting line; when every such distance is
/// positive that ball lies inside the kernel, so the cell is star-shaped with
/// respect to it.
pub fn validate_mesh_assumptions(mesh: &PolygonalMesh, rho_threshold: f64) -> QualityReport {
    let cells = mesh
        .geometries()
        .iter()
        .enumerate()
        .map(|(cell, g)| {
            let h = g.diameter;
            let edge_ratio = g.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min) / h;
            let radius = g
                .edges
                .iter()
                .map(|e| -(g.centroid - e.start).dot(&e.normal))
                .fold(f64::INFINITY, f64::min);
            let ball_ratio = radius.max(0.0) / h;
            let q = CellQuality {
                cell,
                edge_ratio,
                ball_ratio,
                fails_star_shape: ball_ratio < rho_threshold,
                fails_edge_length: edge_ratio < rho_threshold,
            };
            if q.fails_star_shape || q.fails_edge_length {
                log::warn!(
                    "cell {cell}: edge ratio {:.3e}, ball ratio {:.3e} below {rho_threshold}",
                    edge_ratio,
                    ball_ratio
                );
            }
            q
        })
        .collect();
    QualityReport {
        threshold: rho_threshold,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_quad_mesh, Rectangle};
    use approx::assert_relative_eq;
    use nalgebra::Point2;

    #[test]
    fn square_passes() {
        let m = build_structured_quad_mesh(Rectangle::UNIT, 1, 1).unwrap();
        let r = validate_mesh_assumptions(&m, 0.1);
        assert_eq!(r.flagged().count(), 0);
        assert_relative_eq!(r.cells[0].edge_ratio, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn sliver_is_flagged_for_edge_length() {
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.01),
            Point2::new(0.0, 1.0),
        ];
        let m = PolygonalMesh::new(verts, vec![vec![0, 1, 2, 3]]).unwrap();
        let r = validate_mesh_assumptions(&m, 0.1);
        assert!(r.cells[0].fails_edge_length);
        assert!(r.cells[0].edge_ratio < 0.01);
    }

    #[test]
    fn two_by_two_ratios() {
        let m = build_structured_quad_mesh(Rectangle::UNIT, 2, 2).unwrap();
        let r = validate_mesh_assumptions(&m, 0.5);
        // each cell: edge 0.5, diameter sqrt(2)/2, inscribed radius 0.25
        assert!(r.cells.iter().all(|c| !c.fails_edge_length));
        assert_relative_eq!(r.min_edge_ratio(), 0.5 / (0.5 * 2f64.sqrt()), epsilon = 1e-14);
        assert_relative_eq!(r.min_ball_ratio(), 0.25 / (0.5 * 2f64.sqrt()), epsilon = 1e-14);
        assert_eq!(validate_mesh_assumptions(&m, 0.35).flagged().count(), 0);
    }
}
