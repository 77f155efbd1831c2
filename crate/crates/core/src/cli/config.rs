//! Run configuration files (TOML).
//!
//! ```toml
//! [system]
//! n_layers = 1
//! omega_cell = 4.0
//! g = 0.01
//! t_e = 0.001
//! s = 1.0            # or d = 0.25 (then s = d * omega_cell)
//! cutoff = 3
//!
//! [bath]
//! gamma = 1e-6
//! omega0 = 0.05
//! temperature = 250.0
//! omega_k = 0.085
//! mode = "paper-literal"
//!
//! [evolution]
//! t_end = 200.0
//! sample_interval = 0.5
//! ```
//!
//! Omitted fields take defaults: `omega_c` and `drive_frequency` follow
//! `omega_cell`, `drive_amplitude` is `10 * g`. A `[run]` table (as written
//! into manifests) is ignored, so manifests can be fed back in as configs.

use serde::{Deserialize, Serialize};

use crate::bath::{BathConfig, DissipatorMode};
use crate::model::SystemConfig;

/// Drive amplitude default, as a multiple of `g`.
pub const DEFAULT_DRIVE_PER_G: f64 = 10.0;
pub const DEFAULT_T_END: f64 = 200.0;
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.5;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_layers: Option<usize>,
    pub omega_c: Option<f64>,
    pub omega_cell: Option<f64>,
    pub g: Option<f64>,
    pub t_e: Option<f64>,
    pub s: Option<f64>,
    pub d: Option<f64>,
    pub drive_amplitude: Option<f64>,
    pub drive_frequency: Option<f64>,
    pub cutoff: Option<usize>,
    pub coupling_law: Option<String>,
}

impl SystemSection {
    /// Fields set in `self` win over those in `base`.
    pub fn over(self, base: SystemSection) -> SystemSection {
        SystemSection {
            n_layers: self.n_layers.or(base.n_layers),
            omega_c: self.omega_c.or(base.omega_c),
            omega_cell: self.omega_cell.or(base.omega_cell),
            g: self.g.or(base.g),
            t_e: self.t_e.or(base.t_e),
            s: self.s.or(base.s),
            d: self.d.or(base.d),
            drive_amplitude: self.drive_amplitude.or(base.drive_amplitude),
            drive_frequency: self.drive_frequency.or(base.drive_frequency),
            cutoff: self.cutoff.or(base.cutoff),
            coupling_law: self.coupling_law.or(base.coupling_law),
        }
    }

    pub fn resolve(&self) -> Result<SystemConfig, String> {
        let def = SystemConfig::default();
        let omega_cell = self.omega_cell.unwrap_or(def.omega_cell);
        let g = self.g.unwrap_or(def.g);
        let s = match (self.s, self.d) {
            (Some(s), None) => s,
            (None, Some(d)) => d * omega_cell,
            (None, None) => def.s,
            (Some(s), Some(d)) => {
                if (s - d * omega_cell).abs() > 1e-12 * s.abs().max(1.0) {
                    return Err(format!("system.s = {s} and system.d = {d} disagree (d must equal s / omega_cell)"));
                }
                s
            }
        };
        let cfg = SystemConfig {
            n_layers: self.n_layers.unwrap_or(def.n_layers),
            omega_c: self.omega_c.unwrap_or(omega_cell),
            omega_cell,
            g,
            t_e: self.t_e.unwrap_or(def.t_e),
            s,
            drive_amplitude: self.drive_amplitude.unwrap_or(DEFAULT_DRIVE_PER_G * g),
            drive_frequency: self.drive_frequency.unwrap_or(omega_cell),
            cutoff: self.cutoff.unwrap_or(def.cutoff),
            coupling_law: self.coupling_law.clone().unwrap_or(def.coupling_law),
        };
        cfg.validate().map_err(|e| format!("[system] {e}"))?;
        if cfg.n_layers == 0 {
            return Err("[system] n_layers must be >= 1: output columns track cells B10 and B11".into());
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub gamma: Option<f64>,
    pub omega0: Option<f64>,
    pub temperature: Option<f64>,
    pub omega_k: Option<f64>,
    pub mode: Option<DissipatorMode>,
}

impl BathSection {
    pub fn over(self, base: BathSection) -> BathSection {
        BathSection {
            gamma: self.gamma.or(base.gamma),
            omega0: self.omega0.or(base.omega0),
            temperature: self.temperature.or(base.temperature),
            omega_k: self.omega_k.or(base.omega_k),
            mode: self.mode.or(base.mode),
        }
    }

    pub fn resolve(&self) -> Result<BathConfig, String> {
        let def = BathConfig::default();
        let cfg = BathConfig {
            gamma: self.gamma.unwrap_or(def.gamma),
            omega0: self.omega0.unwrap_or(def.omega0),
            temperature: self.temperature.unwrap_or(def.temperature),
            omega_k: self.omega_k.unwrap_or(def.omega_k),
            mode: self.mode.unwrap_or(def.mode),
        };
        cfg.validate().map_err(|e| format!("[bath] {e}"))?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub t_end: Option<f64>,
    pub sample_interval: Option<f64>,
    pub dt: Option<f64>,
    pub record_every: Option<usize>,
    pub initial_state: Option<String>,
}

impl EvolutionSection {
    pub fn over(self, base: EvolutionSection) -> EvolutionSection {
        EvolutionSection {
            t_end: self.t_end.or(base.t_end),
            sample_interval: self.sample_interval.or(base.sample_interval),
            dt: self.dt.or(base.dt),
            record_every: self.record_every.or(base.record_every),
            initial_state: self.initial_state.or(base.initial_state),
        }
    }

    pub fn resolve(&self) -> Result<EvolutionSettings, String> {
        if let Some(state) = &self.initial_state {
            if state != "vacuum" {
                return Err(format!("[evolution] initial_state must be \"vacuum\", got {state:?}"));
            }
        }
        let settings = EvolutionSettings {
            t_end: self.t_end.unwrap_or(DEFAULT_T_END),
            sample_interval: self.sample_interval.unwrap_or(DEFAULT_SAMPLE_INTERVAL),
            dt: self.dt,
            record_every: self.record_every,
        };
        for (name, v) in [("t_end", settings.t_end), ("sample_interval", settings.sample_interval)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(format!("[evolution] {name} must be finite and > 0, got {v}"));
            }
        }
        match (settings.dt, settings.record_every) {
            (Some(dt), _) if !(dt > 0.0) || !dt.is_finite() => Err(format!("[evolution] dt must be finite and > 0, got {dt}")),
            (_, Some(0)) => Err("[evolution] record_every must be >= 1".into()),
            (None, Some(_)) => Err("[evolution] record_every requires dt".into()),
            _ => Ok(settings),
        }
    }
}

/// Time-grid settings before the generator is known.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionSettings {
    pub t_end: f64,
    /// Target spacing of recorded samples when `dt` is not given.
    pub sample_interval: f64,
    pub dt: Option<f64>,
    pub record_every: Option<usize>,
}

/// A fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub bath: BathConfig,
    pub evolution: EvolutionSettings,
}

/// Command-line overrides applied after parsing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub dissipator: Option<DissipatorMode>,
    pub cutoff: Option<usize>,
}

impl Overrides {
    pub fn apply_system(&self, section: SystemSection) -> SystemSection {
        SystemSection { cutoff: self.cutoff, ..SystemSection::default() }.over(section)
    }

    pub fn apply_bath(&self, section: BathSection) -> BathSection {
        BathSection { mode: self.dissipator, ..BathSection::default() }.over(section)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    system: SystemSection,
    #[serde(default)]
    bath: BathSection,
    #[serde(default)]
    evolution: EvolutionSection,
    #[serde(default)]
    #[allow(dead_code)]
    run: Option<toml::Table>,
}

pub fn parse_run_config(text: &str, overrides: &Overrides) -> Result<RunConfig, String> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| e.to_string())?;
    Ok(RunConfig {
        system: overrides.apply_system(file.system).resolve()?,
        bath: overrides.apply_bath(file.bath).resolve()?,
        evolution: file.evolution.resolve()?,
    })
}
