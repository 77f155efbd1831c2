//! Planar-array Hamiltonian with distance-modulated couplings.
//!
//! A central charger mode `C` drives layer 1 of a triangular array of bosonic
//! cells `B_ij` (layer `i = 1..=n`, position `j = 0..=i`). Every bond
//! (charger–cell, inter-layer, intra-layer) carries the same factor `κ(d)`,
//! `d = s / ω_cell`.
//!
//! All operators are dense. The Hilbert-space dimension is
//! `cutoff^(1 + n(n+3)/2)`, so anything beyond two layers is only practical at
//! tiny cutoffs; construction refuses dimensions above [`MAX_DENSE_DIM`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hilbert::{destroy_op, embed, number_op, ModeLayout, OperatorMatrix};

/// Largest Hilbert-space dimension the dense builders accept.
pub const MAX_DENSE_DIM: usize = 4096;

/// `κ(d) = exp(−d)`.
pub fn kappa(d: f64) -> Result<f64> {
    DistanceLaw::exponential().eval(d)
}

/// Named distance-decay law used for `κ(d)`.
#[derive(Clone, Copy, Debug)]
pub struct DistanceLaw {
    name: &'static str,
    f: fn(f64) -> f64,
}

impl DistanceLaw {
    const BUILTIN: &'static [DistanceLaw] = &[DistanceLaw { name: "exp", f: exp_decay }];

    pub fn exponential() -> Self {
        Self::BUILTIN[0]
    }

    /// Looks up a built-in law by name.
    pub fn lookup(name: &str) -> Result<Self> {
        match Self::BUILTIN.iter().find(|law| law.name == name) {
            Some(law) => Ok(*law),
            None => invalid(format!("unknown coupling law {name:?} (known: exp)")),
        }
    }

    /// A user-supplied law. It must map `[0, ∞)` into `(0, 1]`.
    pub fn custom(name: &'static str, f: fn(f64) -> f64) -> Self {
        Self { name, f }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn eval(&self, d: f64) -> Result<f64> {
        if !(d >= 0.0) || !d.is_finite() {
            return invalid(format!("distance must be finite and >= 0, got {d}"));
        }
        Ok((self.f)(d))
    }
}

fn exp_decay(d: f64) -> f64 {
    (-d).exp()
}

/// Geometry, frequencies, couplings and drive of the array.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Number of cell layers; 0 is a bare charger.
    pub n_layers: usize,
    pub omega_c: f64,
    pub omega_cell: f64,
    /// Charger–cell and inter-layer coupling.
    pub g: f64,
    /// Intra-layer tunneling.
    pub t_e: f64,
    /// Raw separation; the dimensionless distance is `s / omega_cell`.
    pub s: f64,
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
    /// Fock levels per mode.
    pub cutoff: usize,
    pub coupling_law: String,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_layers: 1,
            omega_c: 4.0,
            omega_cell: 4.0,
            g: 0.01,
            t_e: 0.001,
            s: 1.0,
            drive_amplitude: 0.1,
            drive_frequency: 4.0,
            cutoff: 4,
            coupling_law: "exp".to_string(),
        }
    }
}

impl SystemConfig {
    /// Dimensionless distance `d = s / ω_cell`.
    pub fn distance(&self) -> f64 {
        self.s / self.omega_cell
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("omega_c", self.omega_c), ("omega_cell", self.omega_cell)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        let nonneg = [
            ("g", self.g),
            ("t_e", self.t_e),
            ("s", self.s),
            ("drive_amplitude", self.drive_amplitude),
            ("drive_frequency", self.drive_frequency),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.cutoff < 2 {
            return invalid(format!("cutoff must be >= 2, got {}", self.cutoff));
        }
        DistanceLaw::lookup(&self.coupling_law)?;
        Ok(())
    }
}

/// A mode of the array.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Site {
    Charger,
    Cell { layer: usize, position: usize },
}

impl Site {
    pub fn label(&self) -> String {
        match *self {
            Site::Charger => "C".to_string(),
            Site::Cell { layer, position } if layer < 10 => format!("B{layer}{position}"),
            Site::Cell { layer, position } => format!("B{layer}_{position}"),
        }
    }
}

/// Sites and bonds; bonds hold indices into `sites`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub sites: Vec<Site>,
    pub charger_bonds: Vec<(usize, usize)>,
    pub interlayer_bonds: Vec<(usize, usize)>,
    pub intralayer_bonds: Vec<(usize, usize)>,
}

impl Geometry {
    pub fn cell_count(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn labels(&self) -> Vec<String> {
        self.sites.iter().map(Site::label).collect()
    }

    /// Site index of cell `B_{layer,position}`.
    pub fn cell_index(layer: usize, position: usize) -> usize {
        debug_assert!(layer >= 1 && position <= layer);
        1 + (layer - 1) * (layer + 2) / 2 + position
    }
}

/// Closed-form cell count `n(n+3)/2`.
pub fn cell_count(n_layers: usize) -> usize {
    n_layers * (n_layers + 3) / 2
}

pub fn build_geometry(n_layers: usize) -> Geometry {
    let mut sites = vec![Site::Charger];
    for layer in 1..=n_layers {
        for position in 0..=layer {
            sites.push(Site::Cell { layer, position });
        }
    }
    let idx = Geometry::cell_index;
    let charger_bonds = if n_layers >= 1 { vec![(0, idx(1, 0)), (0, idx(1, 1))] } else { Vec::new() };
    let mut interlayer_bonds = Vec::new();
    for layer in 1..n_layers {
        for position in 0..=layer {
            interlayer_bonds.push((idx(layer, position), idx(layer + 1, position)));
            interlayer_bonds.push((idx(layer, position), idx(layer + 1, position + 1)));
        }
    }
    let mut intralayer_bonds = Vec::new();
    for layer in 1..=n_layers {
        for position in 0..layer {
            intralayer_bonds.push((idx(layer, position), idx(layer, position + 1)));
        }
    }
    Geometry { sites, charger_bonds, interlayer_bonds, intralayer_bonds }
}

/// Time-independent and drive pieces of the lab-frame Hamiltonian
/// `H(t) = h_static + drive_lower·e^{iω_f t} + drive_lower†·e^{−iω_f t}`.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub h_static: OperatorMatrix,
    /// `F·â`.
    pub drive_lower: OperatorMatrix,
    pub layout: ModeLayout,
}

impl HamiltonianParts {
    /// Lab-frame Hamiltonian at time `t`.
    pub fn lab_frame(&self, t: f64, omega_f: f64) -> OperatorMatrix {
        let phase = C64::new(0.0, omega_f * t).exp();
        let drive = &self.drive_lower.scale(phase) + &self.drive_lower.dagger().scale(phase.conj());
        &self.h_static + &drive
    }

    /// Total excitation number `a†a + Σ b†b`.
    pub fn total_number(&self) -> OperatorMatrix {
        total_number(&self.layout)
    }
}

pub fn total_number(layout: &ModeLayout) -> OperatorMatrix {
    let n = number_op(layout.cutoff());
    let mut out = OperatorMatrix::zeros(layout.dim());
    for k in 0..layout.mode_count() {
        out = &out + &embed(&n, k, layout).expect("number operator matches layout");
    }
    out
}

fn check_dim(layout: &ModeLayout) -> Result<()> {
    if layout.dim() > MAX_DENSE_DIM {
        return invalid(format!(
            "Hilbert-space dimension {} exceeds the dense limit {MAX_DENSE_DIM}; lower the cutoff or layer count",
            layout.dim()
        ));
    }
    Ok(())
}

fn layout_for(labels: Vec<String>, cutoff: usize) -> Result<ModeLayout> {
    let layout = ModeLayout::new(cutoff, labels)?;
    check_dim(&layout)?;
    Ok(layout)
}

/// `x†y + y†x`.
fn hopping(x: &OperatorMatrix, y: &OperatorMatrix) -> OperatorMatrix {
    let xy = &x.dagger() * y;
    &xy + &xy.dagger()
}

pub fn build_hamiltonian(config: &SystemConfig) -> Result<HamiltonianParts> {
    config.validate()?;
    let law = DistanceLaw::lookup(&config.coupling_law)?;
    build_hamiltonian_with_law(config, &law)
}

/// Same as [`build_hamiltonian`] with an explicit decay law.
pub fn build_hamiltonian_with_law(config: &SystemConfig, law: &DistanceLaw) -> Result<HamiltonianParts> {
    config.validate()?;
    let kappa = law.eval(config.distance())?;
    let geometry = build_geometry(config.n_layers);
    let layout = layout_for(geometry.labels(), config.cutoff)?;
    let a = destroy_op(config.cutoff)?;
    let n = number_op(config.cutoff);
    let lowering: Vec<OperatorMatrix> =
        (0..layout.mode_count()).map(|k| embed(&a, k, &layout)).collect::<Result<_>>()?;

    let mut h = embed(&n, 0, &layout)?.scale_real(config.omega_c);
    for k in 1..layout.mode_count() {
        h = &h + &embed(&n, k, &layout)?.scale_real(config.omega_cell);
    }
    let g = kappa * config.g;
    for &(x, y) in geometry.charger_bonds.iter().chain(&geometry.interlayer_bonds) {
        h = &h + &hopping(&lowering[x], &lowering[y]).scale_real(g);
    }
    let t_e = kappa * config.t_e;
    for &(x, y) in &geometry.intralayer_bonds {
        h = &h + &hopping(&lowering[x], &lowering[y]).scale_real(t_e);
    }
    let drive_lower = lowering[0].scale_real(config.drive_amplitude);
    Ok(HamiltonianParts { h_static: h.hermitized(), drive_lower, layout })
}

/// Charger plus the two first-layer cells, written out term by term.
///
/// Ignores `config.n_layers`; agrees with [`build_hamiltonian`] at one layer.
pub fn build_minimal_cell(config: &SystemConfig) -> Result<HamiltonianParts> {
    let config = SystemConfig { n_layers: 1, ..config.clone() };
    config.validate()?;
    let kappa = DistanceLaw::lookup(&config.coupling_law)?.eval(config.distance())?;
    let layout = layout_for(vec!["C".into(), "B10".into(), "B11".into()], config.cutoff)?;
    let a_loc = destroy_op(config.cutoff)?;
    let a = embed(&a_loc, 0, &layout)?;
    let b10 = embed(&a_loc, 1, &layout)?;
    let b11 = embed(&a_loc, 2, &layout)?;
    let (ad, b10d, b11d) = (a.dagger(), b10.dagger(), b11.dagger());

    let free = &(&ad * &a).scale_real(config.omega_c)
        + &(&(&b10d * &b10) + &(&b11d * &b11)).scale_real(config.omega_cell);
    let charge = &(&ad * &b10) + &(&ad * &b11);
    let charge = (&charge + &charge.dagger()).scale_real(kappa * config.g);
    let tunnel = &b10d * &b11;
    let tunnel = (&tunnel + &tunnel.dagger()).scale_real(kappa * config.t_e);
    let h = &(&free + &charge) + &tunnel;
    Ok(HamiltonianParts { h_static: h.hermitized(), drive_lower: a.scale_real(config.drive_amplitude), layout })
}

/// Generator in the frame rotating at `omega_f`:
/// `H_RF = h_static − ω_f·N̂ + F(â + â†)`.
///
/// Time-independent because every coupling term conserves the total
/// excitation number.
pub fn rotating_frame(parts: &HamiltonianParts, omega_f: f64) -> OperatorMatrix {
    let shift = parts.total_number().scale_real(omega_f);
    let drive = &parts.drive_lower + &parts.drive_lower.dagger();
    (&(&parts.h_static - &shift) + &drive).hermitized()
}
