//! Sparse direct solves with residual and condition diagnostics.

use faer::prelude::*;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::assembly::{BlockSystem, VemSpace};
use crate::error::{Error, Result, SolveDiagnostics};
use crate::sparse::SparseMatrix;

/// Condition estimate above which a solve logs a near-resonance warning.
pub const CONDITION_WARNING: f64 = 1e10;

/// Options for the direct solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Compute a 1-norm condition estimate (a few extra triangular solves).
    pub estimate_condition: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            estimate_condition: true,
        }
    }
}

/// Result of a sparse direct solve.
#[derive(Debug, Clone)]
pub struct LinearSolve {
    pub x: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

fn to_col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn from_col(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Solves `A x = b` by sparse LU with a fill-reducing ordering.
///
/// Reports `||Ax - b|| / ||b||` and, if requested, Hager–Higham's estimate of
/// `||A||_1 ||A^{-1}||_1`. A failed factorization or a non-finite solution
/// is reported as a near-resonance error carrying the diagnostics.
pub fn solve_sparse(a: &SparseMatrix, b: &[f64], options: SolverOptions) -> Result<LinearSolve> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::Dimension {
            context: "linear solve",
            expected: n,
            found: b.len(),
        });
    }
    let mut diagnostics = SolveDiagnostics {
        unknowns: n,
        nonzeros: a.nnz(),
        relative_residual: None,
        condition_estimate: None,
    };
    let fa = a.to_faer()?;
    let lu = match fa.sp_lu() {
        Ok(lu) => lu,
        Err(e) => {
            return Err(Error::NearResonance {
                message: format!("sparse LU factorization failed: {e:?}"),
                diagnostics,
            })
        }
    };
    let mut rhs = to_col(b);
    lu.solve_in_place(rhs.as_mut());
    let x = from_col(&rhs);

    let ax = a.matvec(&x);
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rn = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    diagnostics.relative_residual = Some(if bn > 0.0 { rn / bn } else { rn });

    if options.estimate_condition && n > 0 {
        let inv_norm = hager_higham(n, |v| {
            let mut m = to_col(v);
            lu.solve_in_place(m.as_mut());
            from_col(&m)
        }, |v| {
            let mut m = to_col(v);
            lu.solve_transpose_in_place(m.as_mut());
            from_col(&m)
        });
        diagnostics.condition_estimate = Some(a.norm_1() * inv_norm);
    }

    if !x.iter().all(|v| v.is_finite()) || diagnostics.condition_estimate.is_some_and(|c| !c.is_finite()) {
        return Err(Error::NearResonance {
            message: "solution is not finite; the matrix is numerically singular".into(),
            diagnostics,
        });
    }
    if let Some(c) = diagnostics.condition_estimate {
        if c > CONDITION_WARNING {
            log::warn!(
                "condition estimate {c:.3e} exceeds {CONDITION_WARNING:.0e}: a wave number may be close to a Laplace eigenvalue"
            );
        }
    }
    Ok(LinearSolve { x, diagnostics })
}

/// Estimates `||A^{-1}||_1` from solves with `A` and `A^T`.
fn hager_higham(n: usize, solve: impl Fn(&[f64]) -> Vec<f64>, solve_t: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    for iter in 0..5 {
        let y = solve(&x);
        let new_est = norm1(&y);
        if iter > 0 && new_est <= est {
            break;
        }
        est = new_est;
        let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = solve_t(&xi);
        let (j, zmax) = z
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bj, bm), (i, v)| if v.abs() > bm { (i, v.abs()) } else { (bj, bm) });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx {
            break;
        }
        x = vec![0.0; n];
        x[j] = 1.0;
    }
    // Higham's alternating-sign safeguard
    let alt: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
        })
        .collect();
    let y = solve(&alt);
    est.max(2.0 * norm1(&y) / (3.0 * n as f64))
}

/// DOF vectors of both potentials and the diagnostics of the solve.
#[derive(Debug, Clone)]
pub struct PotentialSolution {
    pub phi_p: DVector<f64>,
    pub phi_s: DVector<f64>,
    pub diagnostics: SolveDiagnostics,
}

pub fn solve_block_system(sys: &BlockSystem) -> Result<PotentialSolution> {
    solve_block_system_with(sys, SolverOptions::default())
}

pub fn solve_block_system_with(sys: &BlockSystem, options: SolverOptions) -> Result<PotentialSolution> {
    let sol = solve_sparse(&sys.matrix(), &sys.rhs(), options)?;
    log::info!(
        "solved {} unknowns, residual {:.2e}, condition estimate {:?}",
        sol.diagnostics.unknowns,
        sol.diagnostics.relative_residual.unwrap_or(f64::NAN),
        sol.diagnostics.condition_estimate
    );
    Ok(PotentialSolution {
        phi_p: DVector::from_column_slice(&sol.x[..sys.n_p]),
        phi_s: DVector::from_column_slice(&sol.x[sys.n_p..]),
        diagnostics: sol.diagnostics,
    })
}

/// Standalone scalar problem `(A - kappa^2 M) phi = rhs` on one space, with
/// natural boundary conditions.
pub fn solve_scalar_helmholtz(space: &VemSpace, kappa2: f64, rhs: &DVector<f64>, options: SolverOptions) -> Result<LinearSolve> {
    let a = space.stiffness.add_scaled(&space.mass, -kappa2);
    solve_sparse(&a, rhs.as_slice(), options)
}

/// Solves `a` restricted to the interior DOFs with the boundary DOFs fixed
/// to `boundary_values`. The boundary DOFs come first in every space.
pub fn solve_with_dirichlet(a: &SparseMatrix, rhs: &DVector<f64>, n_boundary: usize, boundary_values: &[f64], options: SolverOptions) -> Result<LinearSolve> {
    let n = a.nrows();
    let aii = a.block(n_boundary, n, n_boundary, n);
    let aib = a.block(n_boundary, n, 0, n_boundary);
    let lift = aib.matvec(boundary_values);
    let b: Vec<f64> = (n_boundary..n).map(|i| rhs[i] - lift[i - n_boundary]).collect();
    let mut sol = solve_sparse(&aii, &b, options)?;
    let mut x = boundary_values.to_vec();
    x.append(&mut sol.x);
    sol.x = x;
    Ok(sol)
}
