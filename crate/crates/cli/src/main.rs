//! `magtube`: grid evaluations and verification suites from a config file.
//!
//! Exit codes: 0 success, 1 a verification check failed (or a run-time
//! failure), 2 configuration error.

mod commands;
mod output;
mod registry;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magtube::config::{KeyValues, RunConfig};
use magtube::Error;

#[derive(Parser, Debug)]
#[command(name = "magtube", version, about = "Complex structures from imaginary-time magnetic flows")]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true, env = "MAGTUBE_CONFIG")]
    config: Option<PathBuf>,

    /// Output path; standard output when absent.
    #[arg(long, global = true, env = "MAGTUBE_OUT")]
    out: Option<PathBuf>,

    /// Verification suite (overrides the config `suite` key).
    #[arg(long, global = true, env = "MAGTUBE_SUITE")]
    suite: Option<String>,

    /// Random seed (overrides the config `seed` key).
    #[arg(long, global = true, env = "MAGTUBE_SEED")]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "MAGTUBE_JOBS")]
    jobs: Option<usize>,

    /// Relative integrator tolerance; the absolute tolerance is set to 1e-2 of it.
    #[arg(long, global = true, env = "MAGTUBE_TOL")]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Flow every grid point to the configured time.
    Flow,
    /// Lagrangian frame `P_z(t)` at every grid point.
    Frame,
    /// Almost complex structure, positivity spectrum and transversality.
    Acs,
    /// `f_{±i}`, `κ₂`, the section weight and the potential identities.
    Potential,
    /// Holomorphic extension of the configured `function` and its ∂̄ residual.
    Extend,
    /// Run a verification suite and print a JSON report.
    Verify {
        /// Suite name: geometry, flow, frames, kahler, intertwine,
        /// flat-oracle, sphere-oracle or all.
        name: Option<String>,
    },
    /// Continuation success and positivity per momentum shell.
    Sweep,
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Config(String),
    Run(String),
    ChecksFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::UnknownSuite(_) => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn load_config(cli: &Cli, required: bool) -> Result<Option<RunConfig>, Failure> {
    let mut kv = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            KeyValues::parse(&text)?
        }
        None if required => return Err(Failure::Config("this command needs --config".into())),
        None => return Ok(None),
    };
    if let Some(seed) = cli.seed {
        kv.set("seed", seed.to_string());
    }
    if let Some(tol) = cli.tol {
        kv.set("rel_tol", tol.to_string());
        kv.set("abs_tol", (tol * 1e-2).to_string());
    }
    if let Some(jobs) = cli.jobs {
        kv.set("jobs", jobs.to_string());
    }
    if let Some(suite) = &cli.suite {
        kv.set("suite", suite.clone());
    }
    Ok(Some(RunConfig::from_keys(&kv, &registry::builtin())?))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli, !matches!(cli.command, Command::Verify { .. }))?;
    if let Some(tol) = cli.tol {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Failure::Config(format!("--tol must be positive, got {tol}")));
        }
    }
    let jobs = cli.jobs.or(config.as_ref().and_then(|c| c.jobs));
    if let Some(jobs) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Run(format!("cannot start worker pool: {e}")))?;
    }
    let out = cli.out.clone().or_else(|| config.as_ref().and_then(|c| c.output.clone()));
    match &cli.command {
        Command::Verify { name } => {
            let passed = commands::verify(cli, config.as_ref(), name.as_deref(), out.as_deref())?;
            if !passed {
                return Err(Failure::ChecksFailed);
            }
            Ok(())
        }
        other => {
            let config = config.expect("config is required for data commands");
            let geo = config.geometry.build(&registry::builtin())?;
            let table = match other {
                Command::Flow => commands::flow(&geo, &config),
                Command::Frame => commands::frame(&geo, &config),
                Command::Acs => commands::acs(&geo, &config),
                Command::Potential => commands::potential(&geo, &config),
                Command::Extend => commands::extend(&geo, &config),
                Command::Sweep => commands::sweep(&geo, &config),
                Command::Verify { .. } => unreachable!(),
            };
            output::write_csv(&table, out.as_deref())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ChecksFailed) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
    }
}
