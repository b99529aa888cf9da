//! `elastovem solve | convergence | patch-test <config.toml>`
//!
//! Exit status: 0 on success, 1 on a numerical or output failure (or a
//! failed patch test), 2 on an invalid configuration.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, PATCH_TOLERANCE};
use config::{Prepared, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "elastovem", version, about = "Virtual element solver for 2D time-harmonic elastic waves")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    /// Only print errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario configuration (TOML).
    config: PathBuf,

    /// Output directory, overriding `output.dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one level and write potentials, displacement samples and diagnostics.
    Solve {
        #[command(flatten)]
        common: Common,

        /// Schedule level to solve (default: the finest).
        #[arg(long)]
        level: Option<usize>,
    },
    /// Run the refinement schedule and write the convergence table.
    Convergence {
        #[command(flatten)]
        common: Common,
    },
    /// Check that a polynomial scenario is reproduced exactly.
    PatchTest {
        #[command(flatten)]
        common: Common,
    },
}

fn prepare(common: &Common) -> Result<(Prepared, PathBuf), CliError> {
    let config = ScenarioConfig::load(&common.config)?;
    let base = common.config.parent().unwrap_or(Path::new("."));
    let out = common.out.clone().unwrap_or_else(|| base.join(&config.output.dir));
    Ok((config.prepare(base)?, out))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.command {
        Command::Solve { common, level } => {
            let (prep, out) = prepare(common)?;
            let d = commands::solve(&prep, *level, &out)?;
            println!("scenario {} level {}", d.scenario, d.level);
            println!("kappa_P = {:.4}, kappa_S = {:.4}", d.kappa_p, d.kappa_s);
            println!("k_P = {}, k_S = {}, dofs = {} + {}", d.k_p, d.k_s, d.dofs_p, d.dofs_s);
            println!("residual = {}, condition = {}", fmt_opt(d.relative_residual), fmt_opt(d.condition_estimate));
            if let Some(l2) = d.l2_error {
                println!("L2 error = {l2:.3e}, max error = {}", fmt_opt(d.max_error));
            }
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::Convergence { common } => {
            let (prep, out) = prepare(common)?;
            let report = commands::convergence(&prep, &out)?;
            print!("{}", report.to_csv());
            Ok(true)
        }
        Command::PatchTest { common } => {
            let (prep, _) = prepare(common)?;
            let outcome = commands::patch_test(&prep)?;
            for (i, e) in outcome.errors.iter().enumerate() {
                let verdict = if *e <= PATCH_TOLERANCE { "ok" } else { "FAIL" };
                println!("level {i}: L2 error {e:.3e} {verdict}");
            }
            let passed = outcome.passed();
            println!("patch test {} (tolerance {PATCH_TOLERANCE:e})", if passed { "passed" } else { "failed" });
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (_, 0) => log::LevelFilter::Warn,
        (_, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
