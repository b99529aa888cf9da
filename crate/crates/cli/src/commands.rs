use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use elastovem::postprocess::{reconstruct_displacement, run_convergence_on_meshes, scenario_errors, ConvergenceReport};
use elastovem::scenarios::solve_scenario;
use elastovem::MaterialParams;

use crate::config::{ConfigError, Prepared};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Solver(#[from] elastovem::Error),

    #[error("failed to write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) | Self::Output { .. } => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).map_err(|source| CliError::Output { path, source })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Debug, Serialize)]
struct Potentials<'a> {
    scenario: &'a str,
    k_p: usize,
    k_s: usize,
    /// Coefficients in each space's global DOF numbering.
    phi_p: Vec<f64>,
    phi_s: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub scenario: String,
    pub level: usize,
    pub material: MaterialParams,
    pub kappa_p: f64,
    pub kappa_s: f64,
    pub k_p: usize,
    pub k_s: usize,
    pub h_p: f64,
    pub h_s: f64,
    pub cells_p: usize,
    pub cells_s: usize,
    pub dofs_p: usize,
    pub dofs_s: usize,
    pub nonzeros: usize,
    pub relative_residual: Option<f64>,
    pub condition_estimate: Option<f64>,
    pub l2_error: Option<f64>,
    pub max_error: Option<f64>,
}

/// Solves one level (the finest unless `level` is given) and writes
/// `potentials.json`, `displacement.csv` and `diagnostics.json`.
pub fn solve(prep: &Prepared, level: Option<usize>, out: &Path) -> Result<Diagnostics> {
    let n_levels = prep.schedule.len();
    let level = level.unwrap_or(n_levels - 1);
    if level >= n_levels {
        return Err(ConfigError {
            path: "--level".into(),
            message: format!("schedule has {n_levels} level(s)"),
        }
        .into());
    }
    let sc = &prep.scenario;
    let cfg = &prep.config;
    let (mesh_p, mesh_s) = prep.schedule.meshes(sc.domain, level)?;
    let run = solve_scenario(sc, mesh_p, mesh_s, cfg.k_p, cfg.k_s, &cfg.options)?;
    let field = reconstruct_displacement(&run.solution, &run.space_p, &run.space_s)?;
    let errors = match sc.displacement {
        Some(_) => Some(scenario_errors(sc, &run)?),
        None => None,
    };

    let m = sc.material;
    let diag = Diagnostics {
        scenario: sc.name.clone(),
        level,
        material: m,
        kappa_p: m.kappa_p(),
        kappa_s: m.kappa_s(),
        k_p: cfg.k_p,
        k_s: cfg.k_s,
        h_p: run.space_p.mesh.mesh_size(),
        h_s: run.space_s.mesh.mesh_size(),
        cells_p: run.space_p.mesh.n_cells(),
        cells_s: run.space_s.mesh.n_cells(),
        dofs_p: run.space_p.n_dofs(),
        dofs_s: run.space_s.n_dofs(),
        nonzeros: run.solution.diagnostics.nonzeros,
        relative_residual: run.solution.diagnostics.relative_residual,
        condition_estimate: run.solution.diagnostics.condition_estimate,
        l2_error: errors.map(|e| e.0),
        max_error: errors.map(|e| e.1),
    };

    create_dir(out)?;
    let potentials = Potentials {
        scenario: &sc.name,
        k_p: cfg.k_p,
        k_s: cfg.k_s,
        phi_p: run.solution.phi_p.iter().copied().collect(),
        phi_s: run.solution.phi_s.iter().copied().collect(),
    };
    write(out.join("potentials.json"), &to_json(&potentials))?;
    let [nx, ny] = cfg.output.grid;
    let mut csv = String::from("x,y,u1,u2\n");
    for [x, y, u1, u2] in field.sample_grid(nx, ny) {
        let _ = writeln!(csv, "{x:.15e},{y:.15e},{u1:.15e},{u2:.15e}");
    }
    write(out.join("displacement.csv"), &csv)?;
    write(out.join("diagnostics.json"), &to_json(&diag))?;
    Ok(diag)
}

/// Runs the whole schedule and writes `convergence.csv` and
/// `convergence.json`.
pub fn convergence(prep: &Prepared, out: &Path) -> Result<ConvergenceReport> {
    let sc = &prep.scenario;
    if sc.displacement.is_none() {
        return Err(ConfigError {
            path: "source".into(),
            message: format!("scenario {} has no exact solution to measure errors against", sc.name),
        }
        .into());
    }
    let cfg = &prep.config;
    let meshes = (0..prep.schedule.len()).map(|i| prep.schedule.meshes(sc.domain, i));
    let report = run_convergence_on_meshes(sc, meshes, cfg.k_p, cfg.k_s, &cfg.options)?;
    create_dir(out)?;
    write(out.join("convergence.csv"), &report.to_csv())?;
    write(out.join("convergence.json"), &to_json(&report))?;
    Ok(report)
}

/// Largest L2 error for which a polynomial scenario counts as reproduced.
pub const PATCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
pub struct PatchOutcome {
    /// L2 displacement error per level.
    pub errors: Vec<f64>,
}

impl PatchOutcome {
    pub fn passed(&self) -> bool {
        self.errors.iter().all(|&e| e <= PATCH_TOLERANCE)
    }
}

/// Solves every level of a polynomial scenario and compares with the exact
/// displacement.
pub fn patch_test(prep: &Prepared) -> Result<PatchOutcome> {
    let sc = &prep.scenario;
    if sc.polynomial_degrees.is_none() {
        return Err(ConfigError {
            path: "source".into(),
            message: "the patch test needs polynomial potentials (`potentials` or builtin `patch-test`)".into(),
        }
        .into());
    }
    let cfg = &prep.config;
    let mut errors = Vec::with_capacity(prep.schedule.len());
    for i in 0..prep.schedule.len() {
        let (mesh_p, mesh_s) = prep.schedule.meshes(sc.domain, i)?;
        let run = solve_scenario(sc, mesh_p, mesh_s, cfg.k_p, cfg.k_s, &cfg.options)?;
        let (l2, _) = scenario_errors(sc, &run)?;
        log::info!("level {i}: L2 error {l2:.3e}");
        errors.push(l2);
    }
    Ok(PatchOutcome { errors })
}
