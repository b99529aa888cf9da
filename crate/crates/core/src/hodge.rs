//! Discrete Helmholtz–Hodge splitting `f = grad f^P + curl f^S` of a vector
//! source.
//!
//! `f^P` solves a Neumann problem whose gauge is fixed by the boundary mean,
//! and `f^S` a homogeneous Dirichlet problem:
//!
//! ```text
//! a(f^P, v) + <1, f^P> <1, v> = -(div f, Pi0 v) + <f.n, v>
//! a(f^S, v)                   =  (rot f, Pi0 v),      f^S = 0 on the boundary
//! ```
//!
//! with `rot f = d1 f2 - d2 f1`, so that `-lap f^S = rot f` for
//! `curl = (d2, -d1)`.

use nalgebra::{DVector, Point2};

use crate::assembly::{load_vector, LoadProjection, ScalarFn, ScalarSource, VectorFn, VemSpace};
use crate::error::Result;
use crate::solver::{solve_sparse, solve_with_dirichlet, SolverOptions};
use crate::sparse::SparseMatrix;
use crate::trace::{boundary_load, boundary_ones, BoundaryLoadMode, Component};

/// Volume source of the elastic problem.
#[derive(Clone)]
pub enum SourceSpec {
    /// The potentials' sources are known in closed form.
    Potentials { f_p: ScalarFn, f_s: ScalarFn },
    /// A vector source with analytic divergence and rotation.
    Vector { f: VectorFn, div: ScalarFn, rot: ScalarFn },
}

impl std::fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Potentials { .. } => write!(f, "Potentials(..)"),
            Self::Vector { .. } => write!(f, "Vector(..)"),
        }
    }
}

/// Gauge-fixed Neumann solve for `f^P` on `space`.
pub fn solve_neumann_potential(space: &VemSpace, div_f: &ScalarFn, f: &VectorFn, proj: LoadProjection) -> Result<DVector<f64>> {
    let n = space.n_dofs();
    let neg_div: ScalarFn = {
        let div_f = div_f.clone();
        std::sync::Arc::new(move |p: &Point2<f64>| -div_f(p))
    };
    let mut rhs = load_vector(space, &ScalarSource::Analytic(neg_div), proj)?;
    rhs += boundary_load(&space.trace, &|p| f(p), Component::Normal, BoundaryLoadMode::Quadrature);

    // [A b; b^T -1] [x; l] = [rhs; 0] eliminates to (A + b b^T) x = rhs.
    let b = boundary_ones(&space.trace);
    let mut t: Vec<(usize, usize, f64)> = space.stiffness.triplets().collect();
    for i in 0..space.n_boundary() {
        t.push((i, n, b[i]));
        t.push((n, i, b[i]));
    }
    t.push((n, n, -1.0));
    let bordered = SparseMatrix::from_triplets(n + 1, n + 1, t);
    let mut full_rhs = rhs.as_slice().to_vec();
    full_rhs.push(0.0);
    let sol = solve_sparse(&bordered, &full_rhs, SolverOptions::default())?;
    Ok(DVector::from_column_slice(&sol.x[..n]))
}

/// Homogeneous Dirichlet solve for `f^S` on `space`.
pub fn solve_dirichlet_potential(space: &VemSpace, rot_f: &ScalarFn, proj: LoadProjection) -> Result<DVector<f64>> {
    let rhs = load_vector(space, &ScalarSource::Analytic(rot_f.clone()), proj)?;
    let zeros = vec![0.0; space.n_boundary()];
    let sol = solve_with_dirichlet(&space.stiffness, &rhs, space.n_boundary(), &zeros, SolverOptions::default())?;
    Ok(DVector::from_vec(sol.x))
}

/// Turns a source specification into the two scalar loads of the coupled
/// system. Vector sources are split numerically on the given spaces, and
/// the two auxiliary problems are solved concurrently.
pub fn decompose(space_p: &VemSpace, space_s: &VemSpace, source: &SourceSpec, proj: LoadProjection) -> Result<(ScalarSource, ScalarSource)> {
    match source {
        SourceSpec::Potentials { f_p, f_s } => Ok((ScalarSource::Analytic(f_p.clone()), ScalarSource::Analytic(f_s.clone()))),
        SourceSpec::Vector { f, div, rot } => {
            let (fp, fs) = rayon::join(
                || solve_neumann_potential(space_p, div, f, proj),
                || solve_dirichlet_potential(space_s, rot, proj),
            );
            Ok((ScalarSource::Discrete(fp?), ScalarSource::Discrete(fs?)))
        }
    }
}
