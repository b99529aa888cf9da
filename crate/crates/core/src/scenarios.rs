//! Built-in reproduction scenarios and the end-to-end solve pipeline.
//!
//! Scenarios are code rather than data so their exact solutions stay
//! evaluable. User-defined polynomial potentials or vector sources are
//! supported through [`Poly2`], which differentiates exactly.

use std::sync::Arc;

use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble_global, BlockSystem, LoadProjection, Loads, ScalarFn, VectorFn, VemSpace};
use crate::error::{Error, Result};
use crate::hodge::{decompose, SourceSpec};
use crate::material::MaterialParams;
use crate::mesh::{build_l_shaped_quad_mesh, build_structured_quad_mesh, PolygonalMesh, Rectangle};
use crate::solver::{solve_block_system_with, PotentialSolution, SolverOptions};
use crate::trace::BoundaryLoadMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    /// `phi^P = x + y`, `phi^S = y^3` with unit parameters.
    PatchTest,
    /// Sandstone layer on the unit square, no closed-form solution.
    Sandstone,
    /// Gaussian displacement on the L-shaped domain with a vector source
    /// that is split numerically.
    GaussianLShape,
    /// `phi^P = x^2 e^y cos y`, `phi^S = y^2 e^x sin x` on the unit square.
    SmoothSquare,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 4] = [Self::PatchTest, Self::Sandstone, Self::GaussianLShape, Self::SmoothSquare];

    pub fn name(self) -> &'static str {
        match self {
            Self::PatchTest => "patch-test",
            Self::Sandstone => "sandstone",
            Self::GaussianLShape => "gaussian-l-shape",
            Self::SmoothSquare => "smooth-square",
        }
    }
}

/// Built-in structured domains. `n` counts cells per unit-square side, or
/// per short side (length 0.5) of the L-shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    UnitSquare,
    LShape,
}

impl Domain {
    pub fn mesh(self, n: usize) -> Result<PolygonalMesh> {
        match self {
            Self::UnitSquare => build_structured_quad_mesh(Rectangle::UNIT, n, n),
            Self::LShape => build_l_shaped_quad_mesh(n),
        }
    }
}

/// A bivariate polynomial `sum c x^a y^b`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly2 {
    /// `(coefficient, a, b)` triples.
    pub terms: Vec<(f64, u32, u32)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(f64, u32, u32)>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, p: &Point2<f64>) -> f64 {
        self.terms.iter().map(|&(c, a, b)| c * p.x.powi(a as i32) * p.y.powi(b as i32)).sum()
    }

    pub fn dx(&self) -> Self {
        Self::new(self.terms.iter().filter(|t| t.1 > 0).map(|&(c, a, b)| (c * a as f64, a - 1, b)).collect())
    }

    pub fn dy(&self) -> Self {
        Self::new(self.terms.iter().filter(|t| t.2 > 0).map(|&(c, a, b)| (c * b as f64, a, b - 1)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.terms.iter().map(|&(c, a, b)| (c * s, a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::new(terms)
    }

    pub fn laplacian(&self) -> Self {
        self.dx().dx().add(&self.dy().dy())
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().filter(|t| t.0 != 0.0).map(|t| (t.1 + t.2) as usize).max().unwrap_or(0)
    }

    pub fn to_fn(&self) -> ScalarFn {
        let p = self.clone();
        Arc::new(move |x| p.eval(x))
    }
}

/// Problem data on a domain.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub material: MaterialParams,
    pub domain: Domain,
    pub source: SourceSpec,
    /// Dirichlet displacement datum.
    pub g: VectorFn,
    pub phi_p: Option<ScalarFn>,
    pub phi_s: Option<ScalarFn>,
    pub displacement: Option<VectorFn>,
    /// Largest polynomial degree of the exact potentials, if polynomial.
    pub polynomial_degrees: Option<(usize, usize)>,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("material", &self.material)
            .field("domain", &self.domain)
            .field("source", &self.source)
            .field("exact", &self.displacement.is_some())
            .finish()
    }
}

fn sf(f: impl Fn(&Point2<f64>) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

fn vf(f: impl Fn(&Point2<f64>) -> Vector2<f64> + Send + Sync + 'static) -> VectorFn {
    Arc::new(f)
}

/// Physicists' Hermite polynomial `H_n`.
fn hermite(n: usize, t: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * t);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * t * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `d^i/dx^i d^j/dy^j exp(-c |x - x0|^2)`.
fn gaussian_derivative(c: f64, x0: Point2<f64>, i: usize, j: usize, p: &Point2<f64>) -> f64 {
    let s = c.sqrt();
    let (dx, dy) = (p.x - x0.x, p.y - x0.y);
    let g = (-c * (dx * dx + dy * dy)).exp();
    (-s).powi((i + j) as i32) * hermite(i, s * dx) * hermite(j, s * dy) * g
}

impl Scenario {
    pub fn builtin(id: ScenarioId) -> Self {
        match id {
            ScenarioId::PatchTest => Self::polynomial_potentials(
                id.name(),
                MaterialParams::UNIT,
                Domain::UnitSquare,
                &Poly2::new(vec![(1.0, 1, 0), (1.0, 0, 1)]),
                &Poly2::new(vec![(1.0, 0, 3)]),
            ),
            ScenarioId::Sandstone => {
                let m = MaterialParams::SANDSTONE;
                let pm = m.p_modulus();
                Self {
                    name: id.name().into(),
                    material: m,
                    domain: Domain::UnitSquare,
                    source: SourceSpec::Potentials {
                        f_p: sf(move |p| 2.0 * p.x.cos() / pm),
                        f_s: sf(|_| 0.0),
                    },
                    g: vf(|p| Vector2::new(-p.x.sin() + p.y.cos(), 0.0)),
                    phi_p: None,
                    phi_s: None,
                    displacement: None,
                    polynomial_degrees: None,
                }
            }
            ScenarioId::GaussianLShape => Self::gaussian_l_shape(),
            ScenarioId::SmoothSquare => Self::smooth_square(),
        }
    }

    /// Scenario with polynomial potentials; sources and datum follow exactly.
    pub fn polynomial_potentials(name: &str, material: MaterialParams, domain: Domain, phi_p: &Poly2, phi_s: &Poly2) -> Self {
        let k2 = material.rho * material.kappa * material.kappa;
        let f_p = phi_p.laplacian().scale(-material.p_modulus()).add(&phi_p.scale(-k2));
        let f_s = phi_s.laplacian().scale(-material.mu).add(&phi_s.scale(-k2));
        let (px, py, sx, sy) = (phi_p.dx(), phi_p.dy(), phi_s.dx(), phi_s.dy());
        let u = vf(move |p| Vector2::new(px.eval(p) + sy.eval(p), py.eval(p) - sx.eval(p)));
        Self {
            name: name.into(),
            material,
            domain,
            source: SourceSpec::Potentials {
                f_p: f_p.to_fn(),
                f_s: f_s.to_fn(),
            },
            g: u.clone(),
            phi_p: Some(phi_p.to_fn()),
            phi_s: Some(phi_s.to_fn()),
            displacement: Some(u),
            polynomial_degrees: Some((phi_p.degree(), phi_s.degree())),
        }
    }

    /// Scenario driven by a polynomial displacement through its vector
    /// source `f = -(lambda + mu) grad div u - mu lap u - rho kappa^2 u`,
    /// which is split numerically.
    pub fn polynomial_displacement(name: &str, material: MaterialParams, domain: Domain, u1: &Poly2, u2: &Poly2) -> Self {
        let MaterialParams { lambda, mu, .. } = material;
        let k2 = material.rho * material.kappa * material.kappa;
        let div = u1.dx().add(&u2.dy());
        let f1 = div.dx().scale(-(lambda + mu)).add(&u1.laplacian().scale(-mu)).add(&u1.scale(-k2));
        let f2 = div.dy().scale(-(lambda + mu)).add(&u2.laplacian().scale(-mu)).add(&u2.scale(-k2));
        let div_f = f1.dx().add(&f2.dy());
        let rot_f = f2.dx().add(&f1.dy().scale(-1.0));
        let (a, b) = (u1.clone(), u2.clone());
        let u = vf(move |p| Vector2::new(a.eval(p), b.eval(p)));
        Self {
            name: name.into(),
            material,
            domain,
            source: SourceSpec::Vector {
                f: vf(move |p| Vector2::new(f1.eval(p), f2.eval(p))),
                div: div_f.to_fn(),
                rot: rot_f.to_fn(),
            },
            g: u.clone(),
            phi_p: None,
            phi_s: None,
            displacement: Some(u),
            polynomial_degrees: None,
        }
    }

    fn gaussian_l_shape() -> Self {
        let material = MaterialParams {
            lambda: 1.0,
            mu: 5.0,
            rho: 10.0,
            kappa: 1.0,
        };
        const C: f64 = 100.0;
        let c1 = Point2::new(0.25, 1.75);
        let c2 = Point2::new(1.75, 0.25);
        let MaterialParams { lambda, mu, .. } = material;
        let k2 = material.rho * material.kappa * material.kappa;
        // u = (G1, G2); every derivative is a Hermite-weighted Gaussian.
        let g1 = move |i: usize, j: usize, p: &Point2<f64>| gaussian_derivative(C, c1, i, j, p);
        let g2 = move |i: usize, j: usize, p: &Point2<f64>| gaussian_derivative(C, c2, i, j, p);
        let f = vf(move |p| {
            let f1 = -(lambda + mu) * (g1(2, 0, p) + g2(1, 1, p)) - mu * (g1(2, 0, p) + g1(0, 2, p)) - k2 * g1(0, 0, p);
            let f2 = -(lambda + mu) * (g1(1, 1, p) + g2(0, 2, p)) - mu * (g2(2, 0, p) + g2(0, 2, p)) - k2 * g2(0, 0, p);
            Vector2::new(f1, f2)
        });
        // div f = -(lambda + 2 mu) lap div u - rho kappa^2 div u
        let div = sf(move |p| {
            let div_u = g1(1, 0, p) + g2(0, 1, p);
            let lap_div_u = g1(3, 0, p) + g1(1, 2, p) + g2(2, 1, p) + g2(0, 3, p);
            -(lambda + 2.0 * mu) * lap_div_u - k2 * div_u
        });
        // rot f = -mu lap rot u - rho kappa^2 rot u, rot u = d1 u2 - d2 u1
        let rot = sf(move |p| {
            let rot_u = g2(1, 0, p) - g1(0, 1, p);
            let lap_rot_u = g2(3, 0, p) + g2(1, 2, p) - g1(2, 1, p) - g1(0, 3, p);
            -mu * lap_rot_u - k2 * rot_u
        });
        let u = vf(move |p| Vector2::new(g1(0, 0, p), g2(0, 0, p)));
        Self {
            name: ScenarioId::GaussianLShape.name().into(),
            material,
            domain: Domain::LShape,
            source: SourceSpec::Vector { f, div, rot },
            g: u.clone(),
            phi_p: None,
            phi_s: None,
            displacement: Some(u),
            polynomial_degrees: None,
        }
    }

    fn smooth_square() -> Self {
        let material = MaterialParams {
            lambda: 10.0,
            mu: 1.0,
            rho: 1.0,
            kappa: 1.0,
        };
        let f_p = sf(|p| {
            let ey = p.y.exp();
            -24.0 * ey * (p.y.cos() - p.x * p.x * p.y.sin()) - p.x * p.x * ey * p.y.cos()
        });
        let f_s = sf(|p| {
            let ex = p.x.exp();
            -2.0 * ex * (p.x.sin() + p.y * p.y * p.x.cos()) - p.y * p.y * ex * p.x.sin()
        });
        let u = vf(|p| {
            let (ex, ey) = (p.x.exp(), p.y.exp());
            Vector2::new(
                2.0 * (p.x * ey * p.y.cos() + p.y * ex * p.x.sin()),
                p.x * p.x * ey * (p.y.cos() - p.y.sin()) - p.y * p.y * ex * (p.x.cos() + p.x.sin()),
            )
        });
        Self {
            name: ScenarioId::SmoothSquare.name().into(),
            material,
            domain: Domain::UnitSquare,
            source: SourceSpec::Potentials { f_p, f_s },
            g: u.clone(),
            phi_p: Some(sf(|p| p.x * p.x * p.y.exp() * p.y.cos())),
            phi_s: Some(sf(|p| p.y * p.y * p.x.exp() * p.x.sin())),
            displacement: Some(u),
            polynomial_degrees: None,
        }
    }
}

/// Numerical choices for one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    #[serde(default)]
    pub load_projection: LoadProjection,
    #[serde(default)]
    pub boundary_mode: BoundaryLoadMode,
    #[serde(default)]
    pub solver: SolverOptions,
}

/// Spaces, assembled system and potentials of one solve.
#[derive(Debug)]
pub struct ScenarioRun {
    pub space_p: VemSpace,
    pub space_s: VemSpace,
    pub system: BlockSystem,
    pub solution: PotentialSolution,
}

impl ScenarioRun {
    pub fn dof_total(&self) -> usize {
        self.space_p.n_dofs() + self.space_s.n_dofs()
    }
}

/// Builds both spaces, splits the source if needed, assembles and solves.
pub fn solve_scenario(scenario: &Scenario, mesh_p: Arc<PolygonalMesh>, mesh_s: Arc<PolygonalMesh>, k_p: usize, k_s: usize, options: &RunOptions) -> Result<ScenarioRun> {
    let (space_p, space_s) = if Arc::ptr_eq(&mesh_p, &mesh_s) && k_p == k_s {
        let s = VemSpace::new(mesh_p, k_p)?;
        (s.clone(), s)
    } else {
        let (a, b) = rayon::join(|| VemSpace::new(mesh_p, k_p), || VemSpace::new(mesh_s, k_s));
        (a?, b?)
    };
    let (f_p, f_s) = decompose(&space_p, &space_s, &scenario.source, options.load_projection)?;
    let loads = Loads {
        f_p,
        f_s,
        g: Some(scenario.g.clone()),
        load_projection: options.load_projection,
        boundary_mode: options.boundary_mode,
    };
    let system = assemble_global(&space_p, &space_s, &scenario.material, &loads)?;
    let solution = solve_block_system_with(&system, options.solver)?;
    Ok(ScenarioRun {
        space_p,
        space_s,
        system,
        solution,
    })
}

/// Convenience wrapper on the scenario's own domain with `n_p`/`n_s` cells.
pub fn solve_on_domain(scenario: &Scenario, n_p: usize, n_s: usize, k_p: usize, k_s: usize, options: &RunOptions) -> Result<ScenarioRun> {
    if n_p == 0 || n_s == 0 {
        return Err(Error::InvalidParameter("mesh resolution must be positive".into()));
    }
    let mesh_p = Arc::new(scenario.domain.mesh(n_p)?);
    let mesh_s = if n_s == n_p { mesh_p.clone() } else { Arc::new(scenario.domain.mesh(n_s)?) };
    solve_scenario(scenario, mesh_p, mesh_s, k_p, k_s, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_grad(f: &dyn Fn(&Point2<f64>) -> f64, p: &Point2<f64>, h: f64) -> Vector2<f64> {
        Vector2::new(
            (f(&Point2::new(p.x + h, p.y)) - f(&Point2::new(p.x - h, p.y))) / (2.0 * h),
            (f(&Point2::new(p.x, p.y + h)) - f(&Point2::new(p.x, p.y - h))) / (2.0 * h),
        )
    }

    #[test]
    fn hermite_matches_recurrence_values() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_relative_eq!(hermite(2, 0.5), 4.0 * 0.25 - 2.0);
        assert_relative_eq!(hermite(3, 0.5), 8.0 * 0.125 - 12.0 * 0.5);
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let x0 = Point2::new(0.3, 0.4);
        let p = Point2::new(0.35, 0.33);
        let h = 1e-5;
        for i in 0..3 {
            for j in 0..3 {
                let f = |q: &Point2<f64>| gaussian_derivative(100.0, x0, i, j, q);
                let g = fd_grad(&f, &p, h);
                assert_relative_eq!(g.x, gaussian_derivative(100.0, x0, i + 1, j, &p), max_relative = 1e-6, epsilon = 1e-6);
                assert_relative_eq!(g.y, gaussian_derivative(100.0, x0, i, j + 1, &p), max_relative = 1e-6, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn gaussian_source_is_consistent() {
        let s = Scenario::builtin(ScenarioId::GaussianLShape);
        let SourceSpec::Vector { f, div, rot } = &s.source else { panic!() };
        let h = 1e-5;
        for p in [Point2::new(0.3, 1.7), Point2::new(1.7, 0.3), Point2::new(0.2, 0.2)] {
            let f1 = |q: &Point2<f64>| f(q).x;
            let f2 = |q: &Point2<f64>| f(q).y;
            let (g1, g2) = (fd_grad(&f1, &p, h), fd_grad(&f2, &p, h));
            let scale = 1.0 + div(&p).abs();
            assert!((g1.x + g2.y - div(&p)).abs() < 1e-4 * scale);
            let scale = 1.0 + rot(&p).abs();
            assert!((g2.x - g1.y - rot(&p)).abs() < 1e-4 * scale);
        }
    }

    #[test]
    fn smooth_square_data_satisfy_the_equations() {
        let s = Scenario::builtin(ScenarioId::SmoothSquare);
        let (pp, ps) = (s.phi_p.clone().unwrap(), s.phi_s.clone().unwrap());
        let SourceSpec::Potentials { f_p, f_s } = &s.source else { panic!() };
        let m = s.material;
        let k2 = m.rho * m.kappa * m.kappa;
        let h = 1e-4;
        let lap = |f: &ScalarFn, p: &Point2<f64>| {
            (f(&Point2::new(p.x + h, p.y)) + f(&Point2::new(p.x - h, p.y)) + f(&Point2::new(p.x, p.y + h)) + f(&Point2::new(p.x, p.y - h))
                - 4.0 * f(p))
                / (h * h)
        };
        for p in [Point2::new(0.2, 0.7), Point2::new(0.9, 0.1)] {
            assert_relative_eq!(-m.p_modulus() * lap(&pp, &p) - k2 * pp(&p), f_p(&p), max_relative = 1e-5);
            assert_relative_eq!(-m.mu * lap(&ps, &p) - k2 * ps(&p), f_s(&p), max_relative = 1e-5);
            let u = (s.displacement.as_ref().unwrap())(&p);
            let gp = fd_grad(pp.as_ref(), &p, 1e-6);
            let gs = fd_grad(ps.as_ref(), &p, 1e-6);
            assert_relative_eq!(u.x, gp.x + gs.y, max_relative = 1e-7);
            assert_relative_eq!(u.y, gp.y - gs.x, max_relative = 1e-7);
        }
    }

    #[test]
    fn patch_test_data() {
        let s = Scenario::builtin(ScenarioId::PatchTest);
        let SourceSpec::Potentials { f_p, f_s } = &s.source else { panic!() };
        let p = Point2::new(0.3, 0.8);
        assert_relative_eq!(f_p(&p), -1.1, epsilon = 1e-15);
        assert_relative_eq!(f_s(&p), -(0.8f64.powi(3)) - 4.8, epsilon = 1e-14);
        let u = (s.displacement.unwrap())(&p);
        assert_relative_eq!(u.x, 1.0 + 3.0 * 0.64, epsilon = 1e-14);
        assert_relative_eq!(u.y, 1.0);
        assert_eq!(s.polynomial_degrees, Some((1, 3)));
    }

    #[test]
    fn poly_calculus() {
        let p = Poly2::new(vec![(2.0, 3, 1), (-1.0, 0, 2)]);
        let q = Point2::new(0.5, 2.0);
        assert_relative_eq!(p.dx().eval(&q), 6.0 * 0.25 * 2.0);
        assert_relative_eq!(p.dy().eval(&q), 2.0 * 0.125 - 4.0);
        assert_relative_eq!(p.laplacian().eval(&q), 12.0 * 0.5 * 2.0 - 2.0);
        assert_eq!(p.degree(), 4);
    }

    #[test]
    fn patch_test_solve_reproduces_potentials() {
        let s = Scenario::builtin(ScenarioId::PatchTest);
        let run = solve_on_domain(&s, 2, 2, 1, 3, &RunOptions::default()).unwrap();
        let exact_p = run.space_p.interpolate(&|p| s.phi_p.as_ref().unwrap()(p));
        let exact_s = run.space_s.interpolate(&|p| s.phi_s.as_ref().unwrap()(p));
        assert!((&run.solution.phi_p - exact_p).amax() < 1e-11);
        assert!((&run.solution.phi_s - exact_s).amax() < 1e-11);
        assert_eq!(run.dof_total(), 9 + 45);
    }
}
