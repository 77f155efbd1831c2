//! Debye bath, Redfield rates and eigenbasis jump channels.
//!
//! Units are natural (`ħ = k_B = 1`): temperatures and frequencies share one
//! energy scale, so `coth(ω_k / 2T)` is evaluated on the bare numbers.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hilbert::{eig_hermitian, HermitianEigen, OperatorMatrix};

/// Eigenvalue gaps below this are treated as degenerate in
/// [`DissipatorMode::TransitionFrequency`].
pub const DEGENERACY_TOL: f64 = 1e-9;

/// How channel rates are assigned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissipatorMode {
    /// Downward channels only, all sharing the rate evaluated at `omega_k`.
    #[default]
    PaperLiteral,
    /// Rates evaluated at each transition frequency, with thermal absorption
    /// channels obeying detailed balance.
    TransitionFrequency,
}

impl DissipatorMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DissipatorMode::PaperLiteral => "paper-literal",
            DissipatorMode::TransitionFrequency => "transition-frequency",
        }
    }
}

impl std::str::FromStr for DissipatorMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper-literal" => Ok(Self::PaperLiteral),
            "transition-frequency" => Ok(Self::TransitionFrequency),
            other => Err(format!("unknown dissipator mode {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathConfig {
    /// System–bath coupling `γ`.
    pub gamma: f64,
    /// Debye cutoff `ω₀`.
    pub omega0: f64,
    pub temperature: f64,
    /// Bath frequency at which the paper-literal rate is evaluated.
    pub omega_k: f64,
    pub mode: DissipatorMode,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self { gamma: 1e-6, omega0: 0.05, temperature: 300.0, omega_k: 0.085, mode: DissipatorMode::PaperLiteral }
    }
}

impl BathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return invalid(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        for (name, v) in [("omega0", self.omega0), ("temperature", self.temperature), ("omega_k", self.omega_k)] {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        Ok(())
    }

    /// The single rate shared by all paper-literal channels.
    pub fn literal_rate(&self) -> Result<f64> {
        redfield_rate(spectral_density(self.omega_k, self)?, self.omega_k, self.temperature)
    }
}

/// Debye form `J(ω) = γ·ω / (ω₀² + ω²)`.
pub fn spectral_density(omega_k: f64, cfg: &BathConfig) -> Result<f64> {
    if !(omega_k > 0.0) || !omega_k.is_finite() {
        return invalid(format!("spectral density needs omega > 0, got {omega_k}"));
    }
    Ok(cfg.gamma * omega_k / (cfg.omega0 * cfg.omega0 + omega_k * omega_k))
}

fn check_rate_args(j: f64, omega: f64, temperature: f64) -> Result<()> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return invalid(format!("temperature must be finite and > 0, got {temperature}"));
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return invalid(format!("frequency must be finite and > 0, got {omega}"));
    }
    if !(j >= 0.0) || !j.is_finite() {
        return invalid(format!("spectral density must be finite and >= 0, got {j}"));
    }
    Ok(())
}

/// Emission rate `J·[coth(ω/2T) + 1]`.
pub fn redfield_rate(j: f64, omega_k: f64, temperature: f64) -> Result<f64> {
    check_rate_args(j, omega_k, temperature)?;
    // coth(x) + 1 = 2 / (1 − e^{−2x})
    let x = omega_k / (2.0 * temperature);
    Ok(j * 2.0 / -(-2.0 * x).exp_m1())
}

/// Absorption rate `J·[coth(ω/2T) − 1]`.
pub fn absorption_rate(j: f64, omega: f64, temperature: f64) -> Result<f64> {
    check_rate_args(j, omega, temperature)?;
    // coth(x) − 1 = 2 / (e^{2x} − 1)
    let x = omega / (2.0 * temperature);
    Ok(j * 2.0 / (2.0 * x).exp_m1())
}

/// One dissipator term `L = |e_to⟩⟨e_from|` with its rate.
#[derive(Clone, Debug)]
pub struct JumpChannel {
    pub operator: OperatorMatrix,
    pub rate: f64,
    /// `e_from − e_to`; positive for emission.
    pub transition_frequency: f64,
}

/// A jump between two eigenstates, by index into the ascending spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
    pub frequency: f64,
}

/// Channels of an eigenbasis dissipator, kept in structured form.
#[derive(Clone, Debug)]
pub struct ChannelSet {
    pub eigen: HermitianEigen,
    pub transitions: Vec<Transition>,
}

impl ChannelSet {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    /// Materializes each transition as a Fock-basis operator.
    pub fn channels(&self) -> Vec<JumpChannel> {
        self.transitions
            .iter()
            .map(|t| JumpChannel {
                operator: OperatorMatrix::outer(&self.eigen.vector(t.to), &self.eigen.vector(t.from))
                    .expect("eigenvectors share a dimension"),
                rate: t.rate,
                transition_frequency: t.frequency,
            })
            .collect()
    }

    /// `R[(to, from)]`, summed over transitions.
    pub fn rate_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut r = DMatrix::zeros(n, n);
        for t in &self.transitions {
            r[(t.to, t.from)] += t.rate;
        }
        r
    }

    pub fn max_rate(&self) -> f64 {
        self.transitions.iter().map(|t| t.rate).fold(0.0, f64::max)
    }
}

/// Eigendecomposes `h` and assigns a rate to each eigenstate pair.
pub fn channel_set(h: &OperatorMatrix, cfg: &BathConfig) -> Result<ChannelSet> {
    cfg.validate()?;
    let eigen = eig_hermitian(h)?;
    let e = &eigen.values;
    let n = e.len();
    let mut transitions = Vec::new();
    match cfg.mode {
        DissipatorMode::PaperLiteral => {
            let rate = cfg.literal_rate()?;
            // ascending spectrum: every j > i is a downward (or degenerate) pair
            for from in 0..n {
                for to in 0..from {
                    transitions.push(Transition { from, to, rate, frequency: e[from] - e[to] });
                }
            }
        }
        DissipatorMode::TransitionFrequency => {
            for from in 0..n {
                for to in 0..n {
                    let w = e[from] - e[to];
                    if to == from || w.abs() < DEGENERACY_TOL {
                        continue;
                    }
                    let j = spectral_density(w.abs(), cfg)?;
                    let rate = if w > 0.0 {
                        redfield_rate(j, w, cfg.temperature)?
                    } else {
                        absorption_rate(j, -w, cfg.temperature)?
                    };
                    transitions.push(Transition { from, to, rate, frequency: w });
                }
            }
        }
    }
    Ok(ChannelSet { eigen, transitions })
}

pub fn jump_channels(h_rf: &OperatorMatrix, cfg: &BathConfig) -> Result<Vec<JumpChannel>> {
    Ok(channel_set(h_rf, cfg)?.channels())
}
