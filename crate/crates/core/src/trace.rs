//! Boundary traces of the global VEM space.
//!
//! On each boundary edge a VEM function is the degree-`k` polynomial
//! interpolating its `k + 1` DOFs at the Gauss–Lobatto nodes. The boundary
//! is parametrized by arclength `s` along the chain (counterclockwise,
//! domain on the left). The tangent is `tau = (n2, -n1)`, which points
//! against increasing `s`, so `d/dtau = -d/ds`.

use nalgebra::{DMatrix, DVector, Point2, Vector2};

use crate::dofs::DofMap;
use crate::error::{Error, Result};
use crate::mesh::PolygonalMesh;
use crate::quadrature::{gauss_legendre, gauss_legendre_for_degree};
use crate::sparse::{SparseMatrix, TripletBuilder};
use crate::vemspace::edge_nodes;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySegment {
    /// Arclength at `start`.
    pub s0: f64,
    pub length: f64,
    pub start: Point2<f64>,
    pub end: Point2<f64>,
    pub normal: Vector2<f64>,
    pub tangent: Vector2<f64>,
    /// The `k + 1` global DOFs on this edge, in chain order.
    pub dofs: Vec<usize>,
}

impl BoundarySegment {
    pub fn point_at(&self, t: f64) -> Point2<f64> {
        self.start + (self.end - self.start) * t
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryTraceSpace {
    pub k: usize,
    pub n_dofs: usize,
    pub n_boundary: usize,
    pub perimeter: f64,
    pub segments: Vec<BoundarySegment>,
}

/// Lagrange basis on the `k + 1` Gauss–Lobatto nodes of `[0, 1]`: values and
/// `t`-derivatives at `t`.
pub fn lobatto_lagrange(k: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    let x = edge_nodes(k);
    let n = x.len();
    let mut val = vec![0.0; n];
    let mut der = vec![0.0; n];
    for i in 0..n {
        let denom: f64 = (0..n).filter(|&j| j != i).map(|j| x[i] - x[j]).product();
        let mut p = 1.0;
        let mut dp = 0.0;
        for j in (0..n).filter(|&j| j != i) {
            dp = dp * (t - x[j]) + p;
            p *= t - x[j];
        }
        val[i] = p / denom;
        der[i] = dp / denom;
    }
    (val, der)
}

impl BoundaryTraceSpace {
    pub fn new(mesh: &PolygonalMesh, dofs: &DofMap) -> Self {
        let k = dofs.k;
        let mut s = 0.0;
        let verts = mesh.vertices();
        let segments = mesh
            .boundary_edges()
            .iter()
            .map(|be| {
                let start = verts[be.from];
                let end = verts[be.to];
                let d = end - start;
                let length = d.norm();
                let normal = Vector2::new(d.y, -d.x) / length;
                let mut seg_dofs = Vec::with_capacity(k + 1);
                seg_dofs.push(dofs.vertex_dof[be.from]);
                let pts = &dofs.edge_dofs[be.edge];
                if mesh.edges()[be.edge].vertices[0] == be.from {
                    seg_dofs.extend(pts.iter().copied());
                } else {
                    seg_dofs.extend(pts.iter().rev().copied());
                }
                seg_dofs.push(dofs.vertex_dof[be.to]);
                let seg = BoundarySegment {
                    s0: s,
                    length,
                    start,
                    end,
                    normal,
                    tangent: Vector2::new(normal.y, -normal.x),
                    dofs: seg_dofs,
                };
                s += length;
                seg
            })
            .collect();
        Self {
            k,
            n_dofs: dofs.n_dofs,
            n_boundary: dofs.n_boundary,
            perimeter: s,
            segments,
        }
    }

    pub fn start_point(&self) -> Point2<f64> {
        self.segments[0].start
    }

    /// Segment containing arclength `s` and the local parameter in `[0, 1]`.
    pub fn locate(&self, s: f64) -> (usize, f64) {
        let i = self.segments.partition_point(|seg| seg.s0 <= s).saturating_sub(1);
        let seg = &self.segments[i];
        (i, ((s - seg.s0) / seg.length).clamp(0.0, 1.0))
    }

    pub fn point_at(&self, s: f64) -> Point2<f64> {
        let (i, t) = self.locate(s);
        self.segments[i].point_at(t)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.s0).collect();
        b.push(self.perimeter);
        b
    }

    /// Value of the trace of a global DOF vector at arclength `s`.
    pub fn trace_value(&self, coeffs: &[f64], s: f64) -> f64 {
        let (i, t) = self.locate(s);
        let (v, _) = lobatto_lagrange(self.k, t);
        self.segments[i].dofs.iter().zip(&v).map(|(&d, l)| coeffs[d] * l).sum()
    }

    /// Tangential derivative of the trace at arclength `s`.
    pub fn trace_tangential_derivative(&self, coeffs: &[f64], s: f64) -> f64 {
        let (i, t) = self.locate(s);
        let seg = &self.segments[i];
        let (_, dv) = lobatto_lagrange(self.k, t);
        -seg.dofs.iter().zip(&dv).map(|(&d, l)| coeffs[d] * l).sum::<f64>() / seg.length
    }
}

/// `Q_{ij} = <Phi_j, Phi_i>_Gamma`, rows over all DOFs, columns over the
/// boundary DOFs.
pub fn assemble_boundary_mass(space: &BoundaryTraceSpace) -> SparseMatrix {
    let k = space.k;
    let rule = gauss_legendre(k + 1);
    let mut local = DMatrix::zeros(k + 1, k + 1);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let (v, _) = lobatto_lagrange(k, t);
        for i in 0..=k {
            for j in 0..=k {
                local[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    let mut tb = TripletBuilder::new(space.n_dofs, space.n_boundary);
    for seg in &space.segments {
        tb.add_local(&seg.dofs, &seg.dofs, &local, seg.length);
    }
    tb.build()
}

/// Local polynomial of degree `k - 1` representing the tangential derivative
/// of an edge trace given by its `k + 1` nodal values; coefficients are in
/// powers of the local arclength `sigma` in `[0, L]` measured along the chain.
pub fn tangential_derivative_trace(segment: &BoundarySegment, k: usize, values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), k + 1);
    let nodes = edge_nodes(k);
    let vander = DMatrix::from_fn(k + 1, k + 1, |i, j| nodes[i].powi(j as i32));
    let c = vander
        .lu()
        .solve(&DVector::from_column_slice(values))
        .expect("Gauss–Lobatto Vandermonde matrix is invertible");
    // w(sigma) = sum c_j (sigma / L)^j, d/dtau = -d/dsigma
    let l = segment.length;
    (1..=k).map(|j| -(j as f64) * c[j] / l.powi(j as i32)).collect()
}

/// Checks that two trace spaces describe the same boundary curve with the
/// same start point and direction, then returns the merged breakpoints.
fn merged_partition(p: &BoundaryTraceSpace, s: &BoundaryTraceSpace) -> Result<Vec<f64>> {
    let tol = 1e-10 * p.perimeter.max(s.perimeter);
    if (p.perimeter - s.perimeter).abs() > tol {
        return Err(Error::BoundaryMismatch(format!(
            "perimeters differ: {} vs {}",
            p.perimeter, s.perimeter
        )));
    }
    if (p.start_point() - s.start_point()).norm() > tol {
        return Err(Error::BoundaryMismatch(format!(
            "chains start at different points {} and {}",
            p.start_point(),
            s.start_point()
        )));
    }
    let mut all: Vec<f64> = p.breakpoints().into_iter().chain(s.breakpoints()).collect();
    all.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        match merged.last() {
            Some(&last) if x - last <= tol => {}
            _ => merged.push(x),
        }
    }
    // the two chains must trace the same curve, in the same direction
    for w in merged.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        for x in [w[0], mid] {
            let (a, b) = (p.point_at(x), s.point_at(x));
            if (a - b).norm() > 1e-8 * p.perimeter {
                return Err(Error::BoundaryMismatch(format!(
                    "arclength {x}: boundary points {a} and {b} differ"
                )));
            }
        }
        let tp = p.segments[p.locate(mid).0].tangent;
        let ts = s.segments[s.locate(mid).0].tangent;
        if tp.dot(&ts) < 1.0 - 1e-8 {
            return Err(Error::OrientationMismatch(format!("tangents disagree at arclength {mid}")));
        }
    }
    Ok(merged)
}

/// Coupling matrices on (possibly non-matching) boundary partitions:
/// `B^PS_{ij} = <d_tau Phi^S_j, Phi^P_i>` (`n_P x n_S`) and
/// `B^SP_{ij} = <d_tau Phi^P_j, Phi^S_i>` (`n_S x n_P`). Integrals are
/// computed piecewise on the merged breakpoints with a Gauss rule exact for
/// the product degree, so both are exact.
pub fn assemble_coupling(p: &BoundaryTraceSpace, s: &BoundaryTraceSpace) -> Result<(SparseMatrix, SparseMatrix)> {
    let merged = merged_partition(p, s)?;
    let rule = gauss_legendre((p.k + s.k).div_ceil(2));
    let mut bps = TripletBuilder::new(p.n_dofs, s.n_dofs);
    let mut bsp = TripletBuilder::new(s.n_dofs, p.n_dofs);
    for w in merged.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let seg_p = &p.segments[p.locate(mid).0];
        let seg_s = &s.segments[s.locate(mid).0];
        let mut local_ps = DMatrix::zeros(p.k + 1, s.k + 1);
        let mut local_sp = DMatrix::zeros(s.k + 1, p.k + 1);
        for (&x, &wq) in rule.nodes.iter().zip(&rule.weights) {
            let arc = a + (b - a) * x;
            let tp = (arc - seg_p.s0) / seg_p.length;
            let ts = (arc - seg_s.s0) / seg_s.length;
            let (vp, dp) = lobatto_lagrange(p.k, tp);
            let (vs, ds) = lobatto_lagrange(s.k, ts);
            let weight = wq * (b - a);
            for i in 0..=p.k {
                for j in 0..=s.k {
                    local_ps[(i, j)] += weight * vp[i] * (-ds[j] / seg_s.length);
                    local_sp[(j, i)] += weight * vs[j] * (-dp[i] / seg_p.length);
                }
            }
        }
        bps.add_local(&seg_p.dofs, &seg_s.dofs, &local_ps, 1.0);
        bsp.add_local(&seg_s.dofs, &seg_p.dofs, &local_sp, 1.0);
    }
    Ok((bps.build(), bsp.build()))
}

/// Which component of a vector boundary datum to pair with the traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Normal,
    Tangential,
}

/// How boundary data enter the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryLoadMode {
    /// `<g, Phi_i>` by Gauss quadrature on each edge.
    #[default]
    Quadrature,
    /// Boundary mass matrix times edge-wise nodal samples of `g`.
    Interpolated,
}

/// `<g . c, Phi_i>_Gamma` for the chosen component `c` of a vector datum,
/// returned as a vector over all DOFs.
pub fn boundary_load(
    space: &BoundaryTraceSpace,
    g: &dyn Fn(&Point2<f64>) -> Vector2<f64>,
    component: Component,
    mode: BoundaryLoadMode,
) -> DVector<f64> {
    let dir = |seg: &BoundarySegment| match component {
        Component::Normal => seg.normal,
        Component::Tangential => seg.tangent,
    };
    boundary_load_scalar(space, &|seg, p| g(p).dot(&dir(seg)), mode)
}

/// `<g, Phi_i>_Gamma` for a scalar datum that may depend on the edge (for
/// normal or tangential components, which jump at corners).
pub fn boundary_load_scalar(
    space: &BoundaryTraceSpace,
    g: &dyn Fn(&BoundarySegment, &Point2<f64>) -> f64,
    mode: BoundaryLoadMode,
) -> DVector<f64> {
    let k = space.k;
    let mut out = DVector::zeros(space.n_dofs);
    match mode {
        BoundaryLoadMode::Quadrature => {
            let rule = gauss_legendre_for_degree(2 * k + 4);
            for seg in &space.segments {
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let (v, _) = lobatto_lagrange(k, t);
                    let gv = g(seg, &seg.point_at(t)) * w * seg.length;
                    for (&d, l) in seg.dofs.iter().zip(&v) {
                        out[d] += gv * l;
                    }
                }
            }
        }
        BoundaryLoadMode::Interpolated => {
            let rule = gauss_legendre(k + 1);
            let nodes = edge_nodes(k);
            for seg in &space.segments {
                let samples: Vec<f64> = nodes.iter().map(|&t| g(seg, &seg.point_at(t))).collect();
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let (v, _) = lobatto_lagrange(k, t);
                    let gi: f64 = samples.iter().zip(&v).map(|(s, l)| s * l).sum();
                    for (&d, l) in seg.dofs.iter().zip(&v) {
                        out[d] += w * seg.length * gi * l;
                    }
                }
            }
        }
    }
    out
}

/// `<1, Phi_i>_Gamma`.
pub fn boundary_ones(space: &BoundaryTraceSpace) -> DVector<f64> {
    boundary_load_scalar(space, &|_, _| 1.0, BoundaryLoadMode::Quadrature)
}
