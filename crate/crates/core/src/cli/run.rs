//! Single simulation runs and their manifests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bath::{channel_set, BathConfig};
use crate::dynamics::{run_evolution, EigenGenerator, EvolutionSpec, Generator, Observables, RunOutcome};
use crate::error::Result;
use crate::model::{build_hamiltonian, rotating_frame, SystemConfig};

use super::config::{EvolutionSettings, RunConfig};
use super::output::{trajectory_csv, write_atomic};
use super::CliError;

/// Cells whose ergotropy is written to the trajectory CSV.
pub const TRACKED_CELLS: [&str; 2] = ["B10", "B11"];

#[derive(Clone, Debug)]
pub struct Simulation {
    /// Config with the time grid made explicit.
    pub config: RunConfig,
    pub spec: EvolutionSpec,
    pub outcome: RunOutcome,
    pub dimension: usize,
    pub channel_count: usize,
}

/// Time grid for a generator of the given stiffness.
pub fn evolution_spec(settings: &EvolutionSettings, stiffness: f64) -> Result<EvolutionSpec> {
    match settings.dt {
        Some(dt) => {
            let record_every = settings.record_every.unwrap_or_else(|| ((settings.sample_interval / dt).round() as usize).max(1));
            let spec = EvolutionSpec { t_end: settings.t_end, dt, record_every, initial_state: Default::default() };
            spec.validate()?;
            Ok(spec)
        }
        None => EvolutionSpec::on_sample_grid(settings.t_end, settings.sample_interval, stiffness),
    }
}

/// Builds the rotating-frame generator and integrates from the vacuum.
pub fn simulate(config: &RunConfig) -> Result<Simulation> {
    let parts = build_hamiltonian(&config.system)?;
    let h_rf = rotating_frame(&parts, config.system.drive_frequency);
    let set = channel_set(&h_rf, &config.bath)?;
    let generator = EigenGenerator::new(&set);
    let spec = evolution_spec(&config.evolution, generator.stiffness())?;
    let cells = TRACKED_CELLS.iter().filter_map(|l| parts.layout.index_of(l)).collect();
    let observables = Observables::new(parts.layout.clone(), cells, config.system.omega_cell, parts.h_static.clone())?;
    let outcome = run_evolution(&spec, &generator, &observables)?;
    let mut resolved = config.clone();
    resolved.evolution.dt = Some(spec.dt);
    resolved.evolution.record_every = Some(spec.record_every);
    Ok(Simulation { config: resolved, spec, outcome, dimension: parts.layout.dim(), channel_count: set.len() })
}

#[derive(Serialize)]
struct Manifest<'a> {
    system: &'a SystemConfig,
    bath: &'a BathConfig,
    evolution: ManifestEvolution,
    run: RunInfo,
}

#[derive(Serialize)]
struct ManifestEvolution {
    t_end: f64,
    sample_interval: f64,
    dt: f64,
    record_every: usize,
    initial_state: &'static str,
}

/// The `[run]` table; ignored when a manifest is read back as a config.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunInfo {
    pub version: String,
    pub status: String,
    pub wall_clock_seconds: f64,
    pub max_trace_drift: f64,
    pub min_eigenvalue: f64,
    pub distance: f64,
    pub dimension: usize,
    pub channel_count: usize,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_good_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_parameter: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
}

impl RunInfo {
    pub fn for_simulation(sim: &Simulation, wall_clock_seconds: f64) -> Self {
        let traj = &sim.outcome.trajectory;
        let failure = sim.outcome.failure.as_ref();
        RunInfo {
            version: env!("CARGO_PKG_VERSION").to_string(),
            status: if failure.is_some() { "failed" } else { "ok" }.to_string(),
            wall_clock_seconds,
            max_trace_drift: traj.max_trace_drift(),
            min_eigenvalue: traj.min_eigenvalue(),
            distance: sim.config.system.distance(),
            dimension: sim.dimension,
            channel_count: sim.channel_count,
            samples: traj.samples.len(),
            last_good_time: failure.map(|f| f.last_good_time),
            failure_reason: failure.map(|f| f.reason.clone()),
            ..Default::default()
        }
    }
}

pub fn manifest_toml(config: &RunConfig, run: RunInfo) -> String {
    let manifest = Manifest {
        system: &config.system,
        bath: &config.bath,
        evolution: ManifestEvolution {
            t_end: config.evolution.t_end,
            sample_interval: config.evolution.sample_interval,
            dt: config.evolution.dt.unwrap_or(f64::NAN),
            record_every: config.evolution.record_every.unwrap_or(0),
            initial_state: "vacuum",
        },
        run,
    };
    toml::to_string(&manifest).expect("manifest fields are plain TOML values")
}

/// Paths of the files written for one run.
#[derive(Clone, Debug)]
pub struct RunFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

pub fn write_run(dir: &Path, stem: &str, sim: &Simulation, run: RunInfo) -> std::io::Result<RunFiles> {
    std::fs::create_dir_all(dir)?;
    let files = RunFiles { csv: dir.join(format!("{stem}.csv")), manifest: dir.join(format!("{stem}.manifest.toml")) };
    let csv = trajectory_csv(&sim.outcome.trajectory, sim.outcome.failure.as_ref());
    write_atomic(&files.csv, csv.as_bytes())?;
    write_atomic(&files.manifest, manifest_toml(&sim.config, run).as_bytes())?;
    Ok(files)
}

/// Simulates and writes one run, timing the simulation.
pub fn simulate_and_write(
    config: &RunConfig,
    dir: &Path,
    stem: &str,
    decorate: impl FnOnce(&mut RunInfo),
) -> std::result::Result<(Simulation, RunFiles), CliError> {
    let start = Instant::now();
    let sim = simulate(config).map_err(|e| CliError::Config(e.to_string()))?;
    let mut info = RunInfo::for_simulation(&sim, start.elapsed().as_secs_f64());
    decorate(&mut info);
    let files = write_run(dir, stem, &sim, info).map_err(|e| CliError::Io(format!("writing {stem} outputs in {}: {e}", dir.display())))?;
    Ok((sim, files))
}
