//! One-parameter sweeps and the figure presets.
//!
//! ```toml
//! preset = "fig2a"          # or "custom" (then `parameter` is required)
//! values = [0.25, 0.5, 1.0]
//!
//! [system]
//! cutoff = 3
//! ```
//!
//! Preset rows fill in every fixed parameter; the swept one must come from
//! `values` and may not also be given as a scalar. All other parameters,
//! including the drive amplitude, stay at the base value across the sweep.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use super::config::{BathSection, EvolutionSection, Overrides, RunConfig, SystemSection};
use super::output::{curve_metrics, parse_csv, summary_row, write_atomic, CurveMetrics, SUMMARY_HEADER};
use super::run::simulate_and_write;
use super::CliError;

pub const SUMMARY_FILE: &str = "summary.csv";
/// Column the summary metrics are computed from.
pub const METRIC_COLUMN: &str = "ergotropy_B10";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    /// Dimensionless distance; sets `s = d · omega_cell` at fixed `omega_cell`.
    Distance,
    Separation,
    G,
    TE,
    Gamma,
    Temperature,
    Omega0,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 7] = [Self::Distance, Self::Separation, Self::G, Self::TE, Self::Gamma, Self::Temperature, Self::Omega0];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Distance => "d",
            Self::Separation => "s",
            Self::G => "g",
            Self::TE => "t_e",
            Self::Gamma => "gamma",
            Self::Temperature => "temperature",
            Self::Omega0 => "omega0",
        }
    }

    pub fn apply(&self, base: &RunConfig, value: f64) -> RunConfig {
        let mut cfg = base.clone();
        match self {
            Self::Distance => cfg.system.s = value * cfg.system.omega_cell,
            Self::Separation => cfg.system.s = value,
            Self::G => cfg.system.g = value,
            Self::TE => cfg.system.t_e = value,
            Self::Gamma => cfg.bath.gamma = value,
            Self::Temperature => cfg.bath.temperature = value,
            Self::Omega0 => cfg.bath.omega0 = value,
        }
        cfg
    }

    fn scalar_given(&self, system: &SystemSection, bath: &BathSection) -> bool {
        match self {
            Self::Distance | Self::Separation => system.s.is_some() || system.d.is_some(),
            Self::G => system.g.is_some(),
            Self::TE => system.t_e.is_some(),
            Self::Gamma => bath.gamma.is_some(),
            Self::Temperature => bath.temperature.is_some(),
            Self::Omega0 => bath.omega0.is_some(),
        }
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            format!("unknown sweep parameter {s:?} (expected one of {})", names.join(", "))
        })
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig3a,
    Fig3b,
    Fig3c,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 7] = [Self::Fig2a, Self::Fig2b, Self::Fig2c, Self::Fig3a, Self::Fig3b, Self::Fig3c, Self::Custom];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fig2a => "fig2a",
            Self::Fig2b => "fig2b",
            Self::Fig2c => "fig2c",
            Self::Fig3a => "fig3a",
            Self::Fig3b => "fig3b",
            Self::Fig3c => "fig3c",
            Self::Custom => "custom",
        }
    }

    /// Swept parameter and fixed values of the preset row.
    pub fn row(&self) -> Option<(SweepParameter, SystemSection, BathSection)> {
        let (param, omega, g, gamma, omega0, temperature) = match self {
            Self::Fig2a => (SweepParameter::Distance, 4.0, Some(0.01), Some(1e-6), Some(0.05), Some(250.0)),
            Self::Fig2b => (SweepParameter::G, 4.0, None, Some(1e-6), Some(0.05), Some(300.0)),
            Self::Fig2c => (SweepParameter::TE, 3.0, Some(0.01), Some(1e-6), Some(0.05), Some(300.0)),
            Self::Fig3a => (SweepParameter::Gamma, 3.0, Some(0.01), None, Some(0.05), Some(300.0)),
            Self::Fig3b => (SweepParameter::Temperature, 4.0, Some(0.01), Some(1e-6), Some(0.05), None),
            Self::Fig3c => (SweepParameter::Omega0, 4.0, Some(0.01), Some(1e-6), None, Some(300.0)),
            Self::Custom => return None,
        };
        let t_e = (param != SweepParameter::TE).then_some(0.001);
        let s = (param != SweepParameter::Distance).then_some(1.0);
        let system = SystemSection { n_layers: Some(1), omega_cell: Some(omega), g, t_e, s, ..Default::default() };
        let bath = BathSection { gamma, omega0, temperature, omega_k: Some(0.085), ..Default::default() };
        Some((param, system, bath))
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| format!("unknown preset {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub preset: Preset,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Config at which every non-swept parameter is held.
    pub base: RunConfig,
}

impl SweepSpec {
    pub fn points(&self) -> Vec<RunConfig> {
        self.values.iter().map(|&v| self.parameter.apply(&self.base, v)).collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    preset: Option<String>,
    parameter: Option<String>,
    values: Vec<f64>,
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    bath: BathSection,
    #[serde(default)]
    evolution: EvolutionSection,
}

pub fn parse_sweep_spec(text: &str, overrides: &Overrides) -> Result<SweepSpec, String> {
    let file: SweepFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let preset: Preset = file.preset.as_deref().unwrap_or("custom").parse()?;
    let requested: Option<SweepParameter> = file.parameter.as_deref().map(str::parse).transpose()?;

    let (parameter, system, bath) = match preset.row() {
        Some((param, row_system, row_bath)) => {
            if let Some(p) = requested.filter(|&p| p != param) {
                return Err(format!("preset {} sweeps {param}, not {p}", preset.name()));
            }
            if param.scalar_given(&file.system, &file.bath) {
                return Err(format!("preset {} sweeps {param}; give it only in `values`, not as a scalar", preset.name()));
            }
            (param, file.system.over(row_system), file.bath.over(row_bath))
        }
        None => {
            let param = requested.ok_or("custom sweeps need `parameter`")?;
            if param.scalar_given(&file.system, &file.bath) {
                return Err(format!("{param} is swept; give it only in `values`, not as a scalar"));
            }
            (param, file.system, file.bath)
        }
    };

    if file.values.is_empty() {
        return Err("`values` must not be empty".into());
    }
    if let Some(w) = file.values.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(format!("`values` must be strictly increasing ({} then {})", w[0], w[1]));
    }
    let base = RunConfig {
        system: overrides.apply_system(system).resolve()?,
        bath: overrides.apply_bath(bath).resolve()?,
        evolution: file.evolution.resolve()?,
    };
    let spec = SweepSpec { preset, parameter, values: file.values, base };
    for (point, v) in spec.points().iter().zip(&spec.values) {
        point.system.validate().map_err(|e| format!("{parameter} = {v}: {e}"))?;
        point.bath.validate().map_err(|e| format!("{parameter} = {v}: {e}"))?;
    }
    Ok(spec)
}

/// Result for one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub value: f64,
    /// `None` when the point failed.
    pub metrics: Option<CurveMetrics>,
    pub message: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    pub points: Vec<PointResult>,
}

impl SweepReport {
    pub fn any_failed(&self) -> bool {
        self.points.iter().any(|p| p.metrics.is_none())
    }
}

pub fn point_stem(spec: &SweepSpec, index: usize) -> String {
    format!("{}_{}_{index:02}", spec.preset.name(), spec.parameter.name())
}

/// Runs every point on a pool of `workers` threads and writes the summary.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path, workers: usize, band: f64) -> Result<SweepReport, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("creating {}: {e}", out_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("starting worker pool: {e}")))?;
    let configs = spec.points();
    let results: Vec<Result<PointResult, CliError>> = pool.install(|| {
        configs
            .par_iter()
            .zip(spec.values.par_iter())
            .enumerate()
            .map(|(k, (cfg, &value))| run_point(spec, k, cfg, value, out_dir, band))
            .collect()
    });
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for p in &points {
        summary.push_str(&summary_row(p.value, p.metrics.as_ref()));
        summary.push('\n');
    }
    let path = out_dir.join(SUMMARY_FILE);
    write_atomic(&path, summary.as_bytes()).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(SweepReport { points })
}

fn run_point(spec: &SweepSpec, index: usize, cfg: &RunConfig, value: f64, out_dir: &Path, band: f64) -> Result<PointResult, CliError> {
    let stem = point_stem(spec, index);
    let decorate = |info: &mut super::run::RunInfo| {
        info.sweep_preset = Some(spec.preset.name().to_string());
        info.sweep_parameter = Some(spec.parameter.name().to_string());
        info.sweep_value = Some(value);
    };
    let (sim, files) = match simulate_and_write(cfg, out_dir, &stem, decorate) {
        Ok(done) => done,
        Err(CliError::Config(msg)) => return Ok(PointResult { value, metrics: None, message: Some(msg) }),
        Err(e) => return Err(e),
    };
    if let Some(f) = &sim.outcome.failure {
        return Ok(PointResult { value, metrics: None, message: Some(f.reason.clone()) });
    }
    // metrics come from the written (rounded) values so they can be recomputed from the CSV alone
    let text = std::fs::read_to_string(&files.csv).map_err(|e| CliError::Io(format!("reading {}: {e}", files.csv.display())))?;
    let table = parse_csv(&text).map_err(CliError::Io)?;
    let times = table.column("time").unwrap_or_default();
    let values = table.column(METRIC_COLUMN).unwrap_or_default();
    Ok(PointResult { value, metrics: curve_metrics(&times, &values, band), message: None })
}
