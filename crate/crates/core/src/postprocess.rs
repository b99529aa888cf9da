//! Computable displacement `u_h = grad(Pi_nabla phi^P) + curl(Pi_nabla phi^S)`,
//! error norms and convergence reports.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DVector, Point2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{VectorFn, VemSpace};
use crate::error::{Error, Result};
use crate::material::MaterialParams;
use crate::mesh::{signed_area, CellLocator, PolygonalMesh};
use crate::polybasis::PolynomialCoeffs;
use crate::quadrature::polygon_rule_from_vertices;
use crate::scenarios::{solve_scenario, RunOptions, Scenario};
use crate::solver::PotentialSolution;

/// Extra quadrature degree on top of `2 max(k) + 2` for error integrals, so
/// smooth non-polynomial data do not pollute observed rates.
pub const ERROR_QUADRATURE_HEADROOM: usize = 6;

/// One cell of the common refinement of the P and S meshes.
#[derive(Debug, Clone)]
pub struct FieldPiece {
    /// Counterclockwise vertices.
    pub polygon: Vec<Point2<f64>>,
    pub cell_p: usize,
    pub cell_s: usize,
}

impl FieldPiece {
    pub fn centroid(&self) -> Point2<f64> {
        let n = self.polygon.len() as f64;
        let sum = self.polygon.iter().fold(Vector2::zeros(), |acc, p| acc + p.coords);
        Point2::from(sum / n)
    }
}

/// Piecewise polynomial displacement on the common refinement.
#[derive(Debug, Clone)]
pub struct DisplacementField {
    pub pieces: Vec<FieldPiece>,
    grad_p: Vec<PolynomialCoeffs>,
    grad_s: Vec<PolynomialCoeffs>,
    mesh_p: Arc<PolygonalMesh>,
    mesh_s: Arc<PolygonalMesh>,
    locator_p: CellLocator,
    locator_s: CellLocator,
    max_k: usize,
}

impl DisplacementField {
    /// Field value using the polynomials of the given cell pair.
    pub fn value_in(&self, cell_p: usize, cell_s: usize, x: &Point2<f64>) -> Vector2<f64> {
        let gp = self.grad_p[cell_p].gradient(x);
        let gs = self.grad_s[cell_s].gradient(x);
        Vector2::new(gp.x + gs.y, gp.y - gs.x)
    }

    pub fn piece_value(&self, piece: &FieldPiece, x: &Point2<f64>) -> Vector2<f64> {
        self.value_in(piece.cell_p, piece.cell_s, x)
    }

    /// Value at an arbitrary point of the domain; `None` outside. On a cell
    /// interface the lowest-numbered containing cell wins.
    pub fn evaluate(&self, x: &Point2<f64>) -> Option<Vector2<f64>> {
        let cp = self.locator_p.locate(&self.mesh_p, x)?;
        let cs = self.locator_s.locate(&self.mesh_s, x)?;
        Some(self.value_in(cp, cs, x))
    }

    pub fn max_order(&self) -> usize {
        self.max_k
    }

    /// Values on a uniform `nx x ny` grid of the bounding box, skipping
    /// points outside the domain: `(x, y, u1, u2)`.
    pub fn sample_grid(&self, nx: usize, ny: usize) -> Vec<[f64; 4]> {
        let verts = self.mesh_p.vertices();
        let (lo, hi) = verts.iter().fold((verts[0], verts[0]), |(lo, hi), v| (lo.inf(v), hi.sup(v)));
        let mut out = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let t = |k: usize, n: usize| if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
                let p = Point2::new(lo.x + (hi.x - lo.x) * t(i, nx), lo.y + (hi.y - lo.y) * t(j, ny));
                if let Some(u) = self.evaluate(&p) {
                    out.push([p.x, p.y, u.x, u.y]);
                }
            }
        }
        out
    }
}

fn is_convex(poly: &[Point2<f64>]) -> bool {
    let n = poly.len();
    let scale = poly.iter().map(|p| (p - poly[0]).norm_squared()).fold(0.0, f64::max);
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let c = poly[(i + 2) % n];
        let cross = (b - a).perp(&(c - b));
        cross >= -1e-12 * scale
    })
}

/// Sutherland–Hodgman clipping of `subject` by the convex ccw polygon `clip`.
fn clip_polygon(subject: &[Point2<f64>], clip: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % n];
        let d = b - a;
        let scale = d.norm();
        let side = |p: &Point2<f64>| d.perp(&(p - a)) / scale;
        let input = std::mem::take(&mut out);
        let m = input.len();
        for j in 0..m {
            let p = input[j];
            let q = input[(j + 1) % m];
            let (sp, sq) = (side(&p), side(&q));
            let tol = 1e-13 * scale;
            if sp >= -tol {
                out.push(p);
                if sq < -tol && sp > tol {
                    out.push(p + (q - p) * (sp / (sp - sq)));
                }
            } else if sq > tol {
                out.push(p + (q - p) * (sp / (sp - sq)));
            }
        }
    }
    // drop duplicate consecutive vertices produced by touching edges
    let diam = subject.iter().map(|p| (p - subject[0]).norm()).fold(0.0, f64::max);
    let mut cleaned: Vec<Point2<f64>> = Vec::with_capacity(out.len());
    for p in out {
        if cleaned.last().is_none_or(|q| (p - q).norm() > 1e-12 * diam) {
            cleaned.push(p);
        }
    }
    while cleaned.len() > 1 && (cleaned[0] - cleaned[cleaned.len() - 1]).norm() <= 1e-12 * diam {
        cleaned.pop();
    }
    cleaned
}

fn overlay(mesh_p: &PolygonalMesh, mesh_s: &PolygonalMesh, locator_s: &CellLocator) -> Result<Vec<FieldPiece>> {
    for (mesh, name) in [(mesh_p, "P"), (mesh_s, "S")] {
        if let Some(c) = (0..mesh.n_cells()).find(|&c| !is_convex(&mesh.element_geometry(c).vertices)) {
            return Err(Error::Unsupported(format!(
                "overlay of different P and S meshes needs convex cells; {name} cell {c} is not convex"
            )));
        }
    }
    let pieces: Vec<Vec<FieldPiece>> = (0..mesh_p.n_cells())
        .into_par_iter()
        .map(|cp| {
            let g = mesh_p.element_geometry(cp);
            let (lo, hi) = g.vertices.iter().fold((g.vertices[0], g.vertices[0]), |(lo, hi), v| (lo.inf(v), hi.sup(v)));
            let mut out = Vec::new();
            for cs in locator_s.candidates_in_box(&lo, &hi) {
                let poly = clip_polygon(&mesh_s.element_geometry(cs).vertices, &g.vertices);
                if poly.len() >= 3 && signed_area(&poly) > 1e-12 * g.area {
                    out.push(FieldPiece {
                        polygon: poly,
                        cell_p: cp,
                        cell_s: cs,
                    });
                }
            }
            out
        })
        .collect();
    let pieces: Vec<FieldPiece> = pieces.into_iter().flatten().collect();
    let covered: f64 = pieces.iter().map(|p| signed_area(&p.polygon)).sum();
    if (covered - mesh_p.area()).abs() > 1e-9 * mesh_p.area() {
        return Err(Error::Unsupported(format!(
            "mesh overlay covers area {covered} of {}; the P and S meshes must tile the same domain",
            mesh_p.area()
        )));
    }
    Ok(pieces)
}

fn projected_polynomials(space: &VemSpace, dofs: &DVector<f64>) -> Vec<PolynomialCoeffs> {
    (0..space.mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let ops = &space.elements[c];
            PolynomialCoeffs::new(ops.basis.clone(), ops.project_nabla(&space.local(dofs, c)))
        })
        .collect()
}

/// Builds `u_h` from the potentials' DOFs. Meshes that differ are overlaid
/// by convex clipping.
pub fn reconstruct_displacement(solution: &PotentialSolution, space_p: &VemSpace, space_s: &VemSpace) -> Result<DisplacementField> {
    reconstruct_from_dofs(&solution.phi_p, &solution.phi_s, space_p, space_s)
}

pub fn reconstruct_from_dofs(phi_p: &DVector<f64>, phi_s: &DVector<f64>, space_p: &VemSpace, space_s: &VemSpace) -> Result<DisplacementField> {
    for (v, s, ctx) in [(phi_p, space_p, "P potential"), (phi_s, space_s, "S potential")] {
        if v.len() != s.n_dofs() {
            return Err(Error::Dimension {
                context: ctx,
                expected: s.n_dofs(),
                found: v.len(),
            });
        }
    }
    let locator_p = CellLocator::new(&space_p.mesh);
    let locator_s = CellLocator::new(&space_s.mesh);
    let same = Arc::ptr_eq(&space_p.mesh, &space_s.mesh) || space_p.mesh.same_as(&space_s.mesh);
    let pieces = if same {
        (0..space_p.mesh.n_cells())
            .map(|c| FieldPiece {
                polygon: space_p.mesh.element_geometry(c).vertices.clone(),
                cell_p: c,
                cell_s: c,
            })
            .collect()
    } else {
        overlay(&space_p.mesh, &space_s.mesh, &locator_s)?
    };
    Ok(DisplacementField {
        pieces,
        grad_p: projected_polynomials(space_p, phi_p),
        grad_s: projected_polynomials(space_s, phi_s),
        mesh_p: space_p.mesh.clone(),
        mesh_s: space_s.mesh.clone(),
        locator_p,
        locator_s,
        max_k: space_p.k.max(space_s.k),
    })
}

fn error_degree(field: &DisplacementField) -> usize {
    2 * field.max_k + 2 + ERROR_QUADRATURE_HEADROOM
}

/// `||u - u_h||_{L2}` by fan quadrature on every piece.
pub fn l2_error_displacement(field: &DisplacementField, exact: &(dyn Fn(&Point2<f64>) -> Vector2<f64> + Sync)) -> f64 {
    let degree = error_degree(field);
    field
        .pieces
        .par_iter()
        .map(|piece| {
            let rule = polygon_rule_from_vertices(&piece.polygon, piece.centroid(), degree);
            rule.integrate(|x| (exact(x) - field.piece_value(piece, x)).norm_squared())
        })
        .sum::<f64>()
        .sqrt()
}

/// Largest Euclidean error over each piece's vertices and quadrature points.
pub fn max_error_displacement(field: &DisplacementField, exact: &(dyn Fn(&Point2<f64>) -> Vector2<f64> + Sync)) -> f64 {
    let degree = error_degree(field);
    field
        .pieces
        .par_iter()
        .map(|piece| {
            let rule = polygon_rule_from_vertices(&piece.polygon, piece.centroid(), degree);
            rule.points
                .iter()
                .chain(&piece.polygon)
                .map(|x| (exact(x) - field.piece_value(piece, x)).norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Max |a - b| over the point DOFs of `space_a`.
///
/// Each point DOF of `a` is paired with the DOF of `b` at the same location;
/// where `b` has no DOF there, `b` is evaluated through its `Pi_nabla`
/// polynomial on the containing cell. Moments are ignored.
pub fn dof_sup_error(space_a: &VemSpace, a: &DVector<f64>, space_b: &VemSpace, b: &DVector<f64>) -> Result<f64> {
    if a.len() != space_a.n_dofs() || b.len() != space_b.n_dofs() {
        return Err(Error::Incomparable("DOF vectors do not match their spaces".into()));
    }
    let verts = space_b.mesh.vertices();
    let (lo, hi) = verts.iter().fold((verts[0], verts[0]), |(lo, hi), v| (lo.inf(v), hi.sup(v)));
    let tol = 1e-9 * (hi - lo).norm();
    let key = |p: &Point2<f64>| ((p.x / tol).round() as i64, (p.y / tol).round() as i64);
    let mut by_location: HashMap<(i64, i64), usize> = HashMap::new();
    for (d, p) in space_b.dofs.points.iter().enumerate() {
        if let Some(p) = p {
            by_location.insert(key(p), d);
        }
    }
    let locator = CellLocator::new(&space_b.mesh);
    let mut worst = 0.0f64;
    let mut found_any = false;
    for (d, p) in space_a.dofs.points.iter().enumerate() {
        let Some(p) = p else { continue };
        let vb = match by_location.get(&key(p)) {
            Some(&j) => b[j],
            None => {
                let c = locator.locate(&space_b.mesh, p).ok_or_else(|| {
                    Error::Incomparable(format!("DOF location ({}, {}) lies outside the other mesh", p.x, p.y))
                })?;
                let ops = &space_b.elements[c];
                PolynomialCoeffs::new(ops.basis.clone(), ops.project_nabla(&space_b.local(b, c))).value(p)
            }
        };
        found_any = true;
        worst = worst.max((a[d] - vb).abs());
    }
    if !found_any {
        return Err(Error::Incomparable("no point DOFs to compare".into()));
    }
    Ok(worst)
}

/// Mesh resolutions of one refinement level (see [`crate::scenarios::Domain`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    pub n_p: usize,
    pub n_s: usize,
}

impl Level {
    pub fn uniform(n: usize) -> Self {
        Self { n_p: n, n_s: n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h_p: f64,
    pub h_s: f64,
    pub k_p: usize,
    pub k_s: usize,
    pub dof_total: usize,
    pub l2_error: f64,
    pub max_error: f64,
    pub eoc: Option<f64>,
    pub relative_residual: Option<f64>,
    pub condition_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub material: MaterialParams,
    pub options: RunOptions,
    pub rows: Vec<ConvergenceRow>,
}

/// Column order of [`ConvergenceReport::to_csv`].
pub const CSV_HEADER: &str = "level,h_p,h_s,k_p,k_s,dof_total,l2_error,max_error,eoc";

fn sig16(x: f64) -> String {
    format!("{x:.15e}")
}

impl ConvergenceReport {
    /// Fills the EOC column from consecutive rows.
    pub fn compute_eoc(&mut self) {
        for r in 0..self.rows.len() {
            self.rows[r].eoc = None;
            if r == 0 {
                continue;
            }
            let (prev, cur) = (&self.rows[r - 1], &self.rows[r]);
            let ratio_p = prev.h_p / cur.h_p;
            let ratio_s = prev.h_s / cur.h_s;
            let ratio = if (ratio_p - ratio_s).abs() <= 1e-8 * ratio_p {
                ratio_p
            } else {
                log::warn!("levels {} and {}: h_P and h_S refine by different ratios; using max(h_P, h_S)", r - 1, r);
                prev.h_p.max(prev.h_s) / cur.h_p.max(cur.h_s)
            };
            let eoc = (prev.l2_error / cur.l2_error).ln() / ratio.ln();
            self.rows[r].eoc = eoc.is_finite().then_some(eoc);
        }
    }

    pub fn last_eoc(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.eoc)
    }

    /// CSV with 16 significant digits; the EOC cell is empty where undefined.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.level,
                sig16(r.h_p),
                sig16(r.h_s),
                r.k_p,
                r.k_s,
                r.dof_total,
                sig16(r.l2_error),
                sig16(r.max_error),
                r.eoc.map(sig16).unwrap_or_default()
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Solves `scenario` on each level and tabulates the L2 displacement error.
pub fn run_convergence_study(scenario: &Scenario, levels: &[Level], k_p: usize, k_s: usize, options: &RunOptions) -> Result<ConvergenceReport> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("refinement schedule is empty".into()));
    }
    let meshes = levels.iter().enumerate().map(|(i, lv)| {
        if lv.n_p == 0 || lv.n_s == 0 {
            return Err(Error::AtLevel {
                level: i,
                source: Box::new(Error::InvalidParameter("mesh resolution must be positive".into())),
            });
        }
        let mesh_p = Arc::new(scenario.domain.mesh(lv.n_p)?);
        let mesh_s = if lv.n_s == lv.n_p { mesh_p.clone() } else { Arc::new(scenario.domain.mesh(lv.n_s)?) };
        Ok((mesh_p, mesh_s))
    });
    run_convergence_on_meshes(scenario, meshes, k_p, k_s, options)
}

/// Same as [`run_convergence_study`] for an explicit sequence of mesh pairs,
/// which are built lazily so only one level is held in memory at a time.
pub fn run_convergence_on_meshes<I>(scenario: &Scenario, meshes: I, k_p: usize, k_s: usize, options: &RunOptions) -> Result<ConvergenceReport>
where
    I: IntoIterator<Item = Result<(Arc<PolygonalMesh>, Arc<PolygonalMesh>)>>,
{
    let exact = scenario
        .displacement
        .clone()
        .ok_or_else(|| Error::InvalidParameter(format!("scenario {} has no exact displacement", scenario.name)))?;
    let mut rows = Vec::new();
    for (i, pair) in meshes.into_iter().enumerate() {
        let at = |e: Error| match e {
            e @ Error::AtLevel { .. } => e,
            e => Error::AtLevel {
                level: i,
                source: Box::new(e),
            },
        };
        let (mesh_p, mesh_s) = pair.map_err(at)?;
        let run = solve_scenario(scenario, mesh_p, mesh_s, k_p, k_s, options).map_err(at)?;
        let field = reconstruct_displacement(&run.solution, &run.space_p, &run.space_s).map_err(at)?;
        let row = ConvergenceRow {
            level: i,
            h_p: run.space_p.mesh.mesh_size(),
            h_s: run.space_s.mesh.mesh_size(),
            k_p,
            k_s,
            dof_total: run.dof_total(),
            l2_error: l2_error_displacement(&field, exact.as_ref()),
            max_error: max_error_displacement(&field, exact.as_ref()),
            eoc: None,
            relative_residual: run.solution.diagnostics.relative_residual,
            condition_estimate: run.solution.diagnostics.condition_estimate,
        };
        log::info!("level {i}: h_P = {:.3e}, dofs = {}, L2 error = {:.3e}", row.h_p, row.dof_total, row.l2_error);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidParameter("refinement schedule is empty".into()));
    }
    let mut report = ConvergenceReport {
        scenario: scenario.name.clone(),
        material: scenario.material,
        options: *options,
        rows,
    };
    report.compute_eoc();
    Ok(report)
}

/// Displacement error of a scenario run against its exact solution.
pub fn scenario_errors(scenario: &Scenario, run: &crate::scenarios::ScenarioRun) -> Result<(f64, f64)> {
    let exact: VectorFn = scenario
        .displacement
        .clone()
        .ok_or_else(|| Error::InvalidParameter(format!("scenario {} has no exact displacement", scenario.name)))?;
    let field = reconstruct_displacement(&run.solution, &run.space_p, &run.space_s)?;
    Ok((l2_error_displacement(&field, exact.as_ref()), max_error_displacement(&field, exact.as_ref())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_quad_mesh, Rectangle};
    use crate::scenarios::ScenarioId;
    use approx::assert_relative_eq;

    fn space(n: usize, k: usize) -> VemSpace {
        VemSpace::new(Arc::new(build_structured_quad_mesh(Rectangle::UNIT, n, n).unwrap()), k).unwrap()
    }

    #[test]
    fn zero_potentials_give_zero_field() {
        let s = space(2, 2);
        let z = DVector::zeros(s.n_dofs());
        let f = reconstruct_from_dofs(&z, &z, &s, &s).unwrap();
        assert_eq!(l2_error_displacement(&f, &|_| Vector2::zeros()), 0.0);
        // u_h = 0 against u = (1, 0) on the unit square
        assert_relative_eq!(l2_error_displacement(&f, &|_| Vector2::new(1.0, 0.0)), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn interpolated_patch_potentials_reproduce_u() {
        let sp = space(3, 1);
        let ss = space(3, 3);
        let pp = sp.interpolate(&|p| p.x + p.y);
        let ps = ss.interpolate(&|p| p.y.powi(3));
        let f = reconstruct_from_dofs(&pp, &ps, &sp, &ss).unwrap();
        let u = |p: &Point2<f64>| Vector2::new(1.0 + 3.0 * p.y * p.y, 1.0);
        assert!(l2_error_displacement(&f, &u) < 1e-12);
        assert!(max_error_displacement(&f, &u) < 1e-12);
        let v = f.evaluate(&Point2::new(0.41, 0.77)).unwrap();
        assert_relative_eq!(v.x, 1.0 + 3.0 * 0.77 * 0.77, epsilon = 1e-12);
        assert!(f.evaluate(&Point2::new(1.5, 0.5)).is_none());
    }

    #[test]
    fn quadratic_on_one_element_is_fixed_by_projector() {
        let s = space(1, 2);
        let phi = s.interpolate(&|p| (p.x - 0.5).powi(2));
        let z = DVector::zeros(s.n_dofs());
        let f = reconstruct_from_dofs(&phi, &z, &s, &s).unwrap();
        let v = f.evaluate(&Point2::new(0.8, 0.3)).unwrap();
        assert_relative_eq!(v.x, 2.0 * 0.3, epsilon = 1e-13);
        assert!(v.y.abs() < 1e-13);
    }

    #[test]
    fn nested_overlay_tiles_and_reproduces() {
        let sp = space(2, 1);
        let ss = space(6, 3);
        let pp = sp.interpolate(&|p| 2.0 * p.x - p.y);
        let ps = ss.interpolate(&|p| p.x * p.x * p.y);
        let f = reconstruct_from_dofs(&pp, &ps, &sp, &ss).unwrap();
        assert_eq!(f.pieces.len(), 36);
        let area: f64 = f.pieces.iter().map(|p| signed_area(&p.polygon)).sum();
        assert_relative_eq!(area, 1.0, epsilon = 1e-13);
        let u = |p: &Point2<f64>| Vector2::new(2.0 + p.x * p.x, -1.0 - 2.0 * p.x * p.y);
        assert!(l2_error_displacement(&f, &u) < 1e-12);
    }

    #[test]
    fn non_nested_overlay_clips_cells() {
        let sp = space(2, 1);
        let ss = space(3, 1);
        let pp = sp.interpolate(&|p| p.x);
        let ps = ss.interpolate(&|p| p.y);
        let f = reconstruct_from_dofs(&pp, &ps, &sp, &ss).unwrap();
        // 2x2 against 3x3 grid lines give a 4x4 arrangement of pieces
        assert_eq!(f.pieces.len(), 16);
        let u = |_: &Point2<f64>| Vector2::new(2.0, 0.0);
        assert!(l2_error_displacement(&f, &u) < 1e-13);
    }

    #[test]
    fn clipping_basics() {
        let sq = |x0: f64, y0: f64, s: f64| vec![Point2::new(x0, y0), Point2::new(x0 + s, y0), Point2::new(x0 + s, y0 + s), Point2::new(x0, y0 + s)];
        let c = clip_polygon(&sq(0.5, 0.5, 1.0), &sq(0.0, 0.0, 1.0));
        assert_relative_eq!(signed_area(&c), 0.25, epsilon = 1e-15);
        // touching along an edge only
        let c = clip_polygon(&sq(1.0, 0.0, 1.0), &sq(0.0, 0.0, 1.0));
        assert!(c.len() < 3 || signed_area(&c).abs() < 1e-15);
        assert!(!is_convex(&[Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(1.0, 0.2), Point2::new(1.0, 2.0)]));
    }

    #[test]
    fn dof_sup_error_basics() {
        let s = space(2, 2);
        let a = s.interpolate(&|p| p.x * p.y);
        assert_eq!(dof_sup_error(&s, &a, &s, &a).unwrap(), 0.0);
        let b = a.add_scalar(0.25);
        assert_relative_eq!(dof_sup_error(&s, &a, &s, &b).unwrap(), 0.25);
        // coarse against fine: all coarse point DOFs are fine DOFs
        let fine = space(4, 2);
        let bf = fine.interpolate(&|p| p.x * p.y);
        assert!(dof_sup_error(&s, &a, &fine, &bf).unwrap() < 1e-14);
        // non-matching locations fall back to the projection
        let other = space(3, 2);
        let bo = other.interpolate(&|p| p.x * p.y);
        assert!(dof_sup_error(&s, &a, &other, &bo).unwrap() < 1e-13);
    }

    #[test]
    fn single_level_report_has_no_eoc() {
        let sc = Scenario::builtin(ScenarioId::PatchTest);
        let rep = run_convergence_study(&sc, &[Level::uniform(2)], 1, 3, &RunOptions::default()).unwrap();
        assert_eq!(rep.rows.len(), 1);
        assert!(rep.rows[0].eoc.is_none());
        let csv = rep.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
        assert!(rep.rows[0].l2_error < 1e-10);
    }

    #[test]
    fn eoc_formula() {
        let row = |h: f64, e: f64| ConvergenceRow {
            level: 0,
            h_p: h,
            h_s: h,
            k_p: 1,
            k_s: 1,
            dof_total: 0,
            l2_error: e,
            max_error: e,
            eoc: None,
            relative_residual: None,
            condition_estimate: None,
        };
        let mut rep = ConvergenceReport {
            scenario: "x".into(),
            material: MaterialParams::UNIT,
            options: RunOptions::default(),
            rows: vec![row(0.2, 1e-2), row(0.1, 2.5e-3), row(0.05, 3.125e-4)],
        };
        rep.compute_eoc();
        assert_relative_eq!(rep.rows[1].eoc.unwrap(), 2.0, epsilon = 1e-12);
        assert_relative_eq!(rep.last_eoc().unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn failing_level_is_identified() {
        let sc = Scenario::builtin(ScenarioId::PatchTest);
        let err = run_convergence_study(&sc, &[Level::uniform(1), Level::uniform(0)], 1, 1, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::AtLevel { level: 1, .. }), "{err}");
    }
}
