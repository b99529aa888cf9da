use nalgebra::Point2;

use super::{ElementGeometry, PolygonalMesh};

/// Uniform bucket grid over cell bounding boxes.
#[derive(Debug, Clone)]
pub struct CellLocator {
    origin: Point2<f64>,
    cell_size: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
    tol: f64,
}

fn bbox(g: &ElementGeometry) -> (Point2<f64>, Point2<f64>) {
    g.vertices
        .iter()
        .fold((g.vertices[0], g.vertices[0]), |(lo, hi), v| (lo.inf(v), hi.sup(v)))
}

fn segment_distance(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Point-in-polygon by crossing number; points within `tol` of an edge count
/// as inside.
pub(crate) fn polygon_contains(vertices: &[Point2<f64>], p: &Point2<f64>, tol: f64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = &vertices[i];
        let b = &vertices[(i + 1) % n];
        if segment_distance(p, a, b) <= tol {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl CellLocator {
    pub fn new(mesh: &PolygonalMesh) -> Self {
        let boxes: Vec<_> = mesh.geometries().iter().map(bbox).collect();
        let (lo, hi) = boxes
            .iter()
            .fold((boxes[0].0, boxes[0].1), |(lo, hi), (a, b)| (lo.inf(a), hi.sup(b)));
        let n = (mesh.n_cells() as f64).sqrt().ceil().max(1.0) as usize;
        let ext = hi - lo;
        let dims = [n, n];
        let cell_size = [ext.x.max(f64::MIN_POSITIVE) / n as f64, ext.y.max(f64::MIN_POSITIVE) / n as f64];
        let tol = 1e-10 * ext.norm();
        let mut loc = Self {
            origin: lo,
            cell_size,
            dims,
            buckets: vec![Vec::new(); n * n],
            tol,
        };
        for (c, (a, b)) in boxes.iter().enumerate() {
            let (i0, j0) = loc.bucket_of(&(a - nalgebra::Vector2::repeat(tol)));
            let (i1, j1) = loc.bucket_of(&(b + nalgebra::Vector2::repeat(tol)));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * dims[0] + i].push(c);
                }
            }
        }
        loc
    }

    fn bucket_of(&self, p: &Point2<f64>) -> (usize, usize) {
        let f = |x: f64, o: f64, s: f64, n: usize| (((x - o) / s).floor().max(0.0) as usize).min(n - 1);
        (
            f(p.x, self.origin.x, self.cell_size[0], self.dims[0]),
            f(p.y, self.origin.y, self.cell_size[1], self.dims[1]),
        )
    }

    /// Cells whose bounding boxes may contain `p`.
    pub fn candidates(&self, p: &Point2<f64>) -> &[usize] {
        let (i, j) = self.bucket_of(p);
        &self.buckets[j * self.dims[0] + i]
    }

    /// Candidate cells whose bounding boxes can intersect the box `[lo, hi]`.
    pub fn candidates_in_box(&self, lo: &Point2<f64>, hi: &Point2<f64>) -> Vec<usize> {
        let (i0, j0) = self.bucket_of(lo);
        let (i1, j1) = self.bucket_of(hi);
        let mut out = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend_from_slice(&self.buckets[j * self.dims[0] + i]);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// First cell (lowest index) containing `p`, edges included.
    pub fn locate(&self, mesh: &PolygonalMesh, p: &Point2<f64>) -> Option<usize> {
        self.candidates(p)
            .iter()
            .copied()
            .find(|&c| polygon_contains(&mesh.element_geometry(c).vertices, p, self.tol))
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_l_shaped_quad_mesh, build_structured_quad_mesh, Rectangle};

    #[test]
    fn locates_points() {
        let m = build_structured_quad_mesh(Rectangle::UNIT, 4, 4).unwrap();
        let loc = CellLocator::new(&m);
        let c = loc.locate(&m, &Point2::new(0.6, 0.3)).unwrap();
        assert!(polygon_contains(&m.element_geometry(c).vertices, &Point2::new(0.6, 0.3), 0.0));
        assert!(loc.locate(&m, &Point2::new(1.5, 0.3)).is_none());
        assert!(loc.locate(&m, &Point2::new(1.0, 1.0)).is_some());
    }

    #[test]
    fn l_shape_hole_is_empty() {
        let m = build_l_shaped_quad_mesh(2).unwrap();
        let loc = CellLocator::new(&m);
        assert!(loc.locate(&m, &Point2::new(1.0, 1.0)).is_none());
        assert!(loc.locate(&m, &Point2::new(0.25, 1.0)).is_some());
    }
}
