use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use elastovem::assembly::{LoadProjection, VemSpace};
use elastovem::error::Error;
use elastovem::mesh::{build_structured_quad_mesh, load_mesh, validate_mesh_assumptions, Rectangle};
use elastovem::postprocess::{reconstruct_displacement, scenario_errors};
use elastovem::scenarios::{solve_on_domain, solve_scenario, Domain, Poly2, RunOptions, Scenario, ScenarioId};
use elastovem::solver::{solve_scalar_helmholtz, SolverOptions};
use elastovem::MaterialParams;

fn voronoi() -> Arc<elastovem::PolygonalMesh> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/voronoi_unit_square.json");
    Arc::new(load_mesh(&path, None).unwrap())
}

#[test]
fn voronoi_fixture_is_usable() {
    let m = voronoi();
    assert_eq!(m.n_cells(), 60);
    assert!((m.area() - 1.0).abs() < 1e-12);
    // Voronoi cells have short edges but stay uniformly star-shaped
    let q = validate_mesh_assumptions(&m, 0.1);
    assert!(q.min_ball_ratio() > 0.2, "min ball ratio {}", q.min_ball_ratio());
    assert!(q.min_edge_ratio() > 0.0);
}

#[test]
fn patch_test_on_voronoi_at_equal_orders() {
    let sc = Scenario::builtin(ScenarioId::PatchTest);
    let m = voronoi();
    let run = solve_scenario(&sc, m.clone(), m, 3, 3, &RunOptions::default()).unwrap();
    let (l2, max) = scenario_errors(&sc, &run).unwrap();
    assert!(l2 < 1e-10 && max < 1e-9, "{l2:e} {max:e}");
}

#[test]
fn patch_test_with_different_meshes() {
    let sc = Scenario::builtin(ScenarioId::PatchTest);
    let run = solve_on_domain(&sc, 2, 4, 1, 3, &RunOptions::default()).unwrap();
    let field = reconstruct_displacement(&run.solution, &run.space_p, &run.space_s).unwrap();
    assert_eq!(field.pieces.len(), 16);
    let (l2, _) = scenario_errors(&sc, &run).unwrap();
    assert!(l2 < 1e-10, "{l2:e}");
}

#[test]
fn patch_test_fails_when_order_too_low() {
    // the cubic S-potential is not representable at k_S = 2
    let sc = Scenario::builtin(ScenarioId::PatchTest);
    let run = solve_on_domain(&sc, 4, 4, 1, 2, &RunOptions::default()).unwrap();
    let (l2, _) = scenario_errors(&sc, &run).unwrap();
    assert!(l2 > 1e-6);
}

#[test]
fn reduced_load_projection_is_exact_for_low_degree_data() {
    // linear potentials give linear sources, which the reduced projection
    // onto P_1 still integrates exactly at k = 2
    let sc = Scenario::polynomial_potentials(
        "linear",
        MaterialParams::UNIT,
        Domain::UnitSquare,
        &Poly2::new(vec![(1.0, 1, 0), (-0.5, 0, 1)]),
        &Poly2::new(vec![(2.0, 1, 0), (1.0, 0, 1)]),
    );
    let opts = RunOptions {
        load_projection: LoadProjection::Reduced,
        ..RunOptions::default()
    };
    let run = solve_on_domain(&sc, 3, 3, 2, 2, &opts).unwrap();
    let (l2, _) = scenario_errors(&sc, &run).unwrap();
    assert!(l2 < 1e-10, "{l2:e}");
}

#[test]
fn polynomial_vector_source_through_hodge_split() {
    // u = grad(x^2 y) + curl(x y^2). The split with f^S = 0 on the boundary
    // differs from these potentials by a harmonic pair that is not
    // polynomial, so the displacement converges instead of being exact.
    let u1 = Poly2::new(vec![(4.0, 1, 1)]);
    let u2 = Poly2::new(vec![(1.0, 2, 0), (-1.0, 0, 2)]);
    let sc = Scenario::polynomial_displacement("poly-vector", MaterialParams::UNIT, Domain::UnitSquare, &u1, &u2);
    let errs: Vec<f64> = [4, 8]
        .iter()
        .map(|&n| scenario_errors(&sc, &solve_on_domain(&sc, n, n, 2, 2, &RunOptions::default()).unwrap()).unwrap().0)
        .collect();
    assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
}

#[test]
fn gaussian_hodge_pipeline_converges() {
    let sc = Scenario::builtin(ScenarioId::GaussianLShape);
    let errs: Vec<f64> = [8, 16]
        .iter()
        .map(|&n| scenario_errors(&sc, &solve_on_domain(&sc, n, n, 2, 2, &RunOptions::default()).unwrap()).unwrap().0)
        .collect();
    assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
}

/// Generalized eigenvalues of `(A, M)` via `L^-1 A L^-T`.
fn generalized_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let l = m.clone().cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let s = &li * a * li.transpose();
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn tuning_to_a_discrete_eigenvalue_is_reported() {
    let space = VemSpace::new(Arc::new(build_structured_quad_mesh(Rectangle::UNIT, 3, 3).unwrap()), 2).unwrap();
    let ev = generalized_eigenvalues(&space.stiffness.to_dense(), &space.mass.to_dense());
    let kappa2 = ev[1];
    let rhs = DVector::from_element(space.n_dofs(), 1.0);
    match solve_scalar_helmholtz(&space, kappa2, &rhs, SolverOptions::default()) {
        Err(Error::NearResonance { .. }) => {}
        Ok(sol) => {
            let cond = sol.diagnostics.condition_estimate.unwrap();
            assert!(cond > elastovem::solver::CONDITION_WARNING, "condition {cond:e}");
        }
        Err(e) => panic!("unexpected error {e}"),
    }
    // between the constant mode and the first (double, by symmetry)
    // eigenvalue the same solve is benign
    let mid = 0.5 * (ev[0] + ev[1]);
    let sol = solve_scalar_helmholtz(&space, mid, &rhs, SolverOptions::default()).unwrap();
    let cond = sol.diagnostics.condition_estimate.unwrap();
    assert!(cond < elastovem::solver::CONDITION_WARNING, "condition {cond:e}");
}
