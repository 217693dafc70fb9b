#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod config;

use config::Command;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("{0}")]
    Solver(thinring::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<thinring::Error> for CliError {
    fn from(e: thinring::Error) -> Self {
        use thinring::Error as E;
        match e {
            E::InvalidDomain(_) | E::InadmissibleEpsilon { .. } | E::InvalidParameter(_) | E::KappaOutsideWindow { .. } => {
                CliError::Config(e.to_string())
            }
            E::EigenNonConvergence { .. } | E::NotConverged | E::PoissonResidual { .. } | E::Quadrature { .. } => {
                CliError::NonConvergence(e.to_string())
            }
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Solver(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "thinring", version, about = "Magnetic Laplacian and Ginzburg-Landau solvers on thin rings")]
struct Cli {
    /// Run configuration (TOML, or JSON by extension)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for parameter sweeps
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Overrides numerics.seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Boundary constants and reference field
    Geometry,
    /// Exact, reduced, fiber and effective eigenvalues per thickness
    Eigen,
    /// One-dimensional fiber spectrum
    Fiber,
    /// Lowest eigenvalue along a field sweep at fixed thickness
    Scan,
    /// Superconducting intervals and the critical field
    CriticalField,
    /// Ginzburg-Landau minimization
    Gl,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Geometry => Command::Geometry,
            Sub::Eigen => Command::Eigen,
            Sub::Fiber => Command::Fiber,
            Sub::Scan => Command::Scan,
            Sub::CriticalField => Command::CriticalField,
            Sub::Gl => Command::Gl,
        }
    }
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let cmd = Command::from(cli.command);
    let path = cli.config.ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut cfg = config::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.numerics.seed = seed;
    }
    cfg.validate(cmd)?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
    let out = cli.out.as_path();
    match cmd {
        Command::Geometry => commands::run_geometry(&cfg, out).map(|s| (s, true)),
        Command::Eigen => commands::run_eigen(&cfg, out).map(|s| (s, true)),
        Command::Fiber => commands::run_fiber(&cfg, out).map(|s| (s, true)),
        Command::Scan => commands::run_scan(&cfg, out).map(|s| (s, true)),
        Command::CriticalField => commands::run_critical_field(&cfg, out).map(|s| (s, true)),
        Command::Gl => commands::run_gl(&cfg, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((summary, true)) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Ok((summary, false)) => {
            println!("{summary}");
            eprintln!("minimizer stopped before reaching the energy tolerance");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
