//! Command-line front end: `run <config>` and `sweep <spec>`.
//!
//! Exit codes: 0 success, 1 output I/O error, 2 configuration error,
//! 3 integration failure (partial CSVs are kept with a failure marker).

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bath::DissipatorMode;
use config::{parse_run_config, Overrides};
use sweep::{parse_sweep_spec, run_sweep};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTEGRATION: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qbattery", version, about = "Charging dynamics of planar quantum-battery arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one configuration.
    Run { config: PathBuf },
    /// Simulate every point of a one-parameter sweep.
    Sweep { spec: PathBuf },
}

#[derive(Debug, Args)]
pub struct Options {
    /// Directory for CSVs and manifests.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads for sweeps (default: available hardware threads).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Relative band around the final value used for the stabilization time.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub stabilization_band: f64,
    #[arg(long, global = true, value_parser = ["paper-literal", "transition-frequency"])]
    pub dissipator: Option<String>,
    /// Fock levels per mode, overriding the file.
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
}

impl Options {
    fn overrides(&self) -> Result<Overrides, CliError> {
        let dissipator = self.dissipator.as_deref().map(str::parse::<DissipatorMode>).transpose().map_err(CliError::Config)?;
        Ok(Overrides { dissipator, cutoff: self.cutoff })
    }

    fn workers(&self) -> usize {
        self.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    let opts = &cli.options;
    if !(opts.stabilization_band > 0.0) {
        return Err(CliError::Config(format!("--stabilization-band must be > 0, got {}", opts.stabilization_band)));
    }
    let overrides = opts.overrides()?;
    match &cli.command {
        Command::Run { config } => {
            let text = read_input(config)?;
            let cfg = parse_run_config(&text, &overrides).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            let (sim, files) = run::simulate_and_write(&cfg, &opts.out_dir, &file_stem(config), |_| {})?;
            println!("{}", files.csv.display());
            match &sim.outcome.failure {
                None => Ok(EXIT_OK),
                Some(f) => {
                    eprintln!("integration failed after t = {}: {}", f.last_good_time, f.reason);
                    Ok(EXIT_INTEGRATION)
                }
            }
        }
        Command::Sweep { spec } => {
            let text = read_input(spec)?;
            let sweep = parse_sweep_spec(&text, &overrides).map_err(|e| CliError::Config(format!("{}: {e}", spec.display())))?;
            let report = run_sweep(&sweep, &opts.out_dir, opts.workers(), opts.stabilization_band)?;
            println!("{}", opts.out_dir.join(sweep::SUMMARY_FILE).display());
            for p in report.points.iter().filter(|p| p.metrics.is_none()) {
                eprintln!("{} = {} failed: {}", sweep.parameter, p.value, p.message.as_deref().unwrap_or("unknown"));
            }
            Ok(if report.any_failed() { EXIT_INTEGRATION } else { EXIT_OK })
        }
    }
}
