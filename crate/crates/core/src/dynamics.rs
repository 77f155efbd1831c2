//! Master-equation integration in the rotating frame.
//!
//! The generator is `dρ/dt = −i[H, ρ] + Σ r (2LρL† − L†Lρ − ρL†L)`. Two
//! implementations are provided: [`DenseGenerator`] works with arbitrary
//! channel operators in the Fock basis, [`EigenGenerator`] works in the
//! eigenbasis of `H` where eigenbasis jump channels reduce to population
//! transfer plus diagonal damping of coherences.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::bath::{ChannelSet, JumpChannel};
use crate::error::{invalid, Error, Result};
use crate::ergotropy::{ergotropy_with_spectrum, local_ergotropy_with_tolerance};
use crate::hilbert::{eigenvalues_hermitian, DensityTolerance, ModeLayout, OperatorMatrix, HERMITIAN_INPUT_TOL};

/// Abort when `|Tr ρ − 1|` exceeds this.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Abort when a reduced-state eigenvalue drops below `−POSITIVITY_LIMIT`.
pub const POSITIVITY_LIMIT: f64 = 1e-6;
/// Steps per fastest generator timescale used for the default step.
pub const STEPS_PER_TIMESCALE: f64 = 20.0;

/// Master-equation right-hand side, evaluated literally.
pub fn rhs(rho: &OperatorMatrix, h: &OperatorMatrix, channels: &[JumpChannel]) -> Result<OperatorMatrix> {
    let n = rho.dim();
    if h.dim() != n {
        return invalid(format!("Hamiltonian has dim {} but state has dim {n}", h.dim()));
    }
    let mut out = h.commutator(rho).scale(C64::new(0.0, -1.0));
    for ch in channels {
        if ch.operator.dim() != n {
            return invalid(format!("channel operator has dim {} but state has dim {n}", ch.operator.dim()));
        }
        let l = &ch.operator;
        let ld = l.dagger();
        let ldl = &ld * l;
        let gain = &(&(l * rho) * &ld).scale_real(2.0);
        let loss = &(&ldl * rho) + &(rho * &ldl);
        out = &out + &(gain - &loss).scale_real(ch.rate);
    }
    Ok(out)
}

/// A linear generator acting on states in its own working basis.
pub trait Generator: Sync {
    fn dim(&self) -> usize;

    /// Maps a Fock-basis state into the working basis.
    fn to_working(&self, rho: &OperatorMatrix) -> OperatorMatrix;

    /// Maps a working-basis state back to the Fock basis.
    fn from_working(&self, rho: &OperatorMatrix) -> OperatorMatrix;

    /// `dρ/dt` for a working-basis state.
    fn apply(&self, rho: &OperatorMatrix) -> OperatorMatrix;

    /// Writes `dρ/dt` into `out`, which has the same dimension as `rho`.
    fn apply_into(&self, rho: &OperatorMatrix, out: &mut OperatorMatrix) {
        *out = self.apply(rho);
    }

    /// Largest rate scale of the generator (inverse of its fastest timescale).
    fn stiffness(&self) -> f64;
}

/// Fock-basis generator for arbitrary jump operators.
#[derive(Clone, Debug)]
pub struct DenseGenerator {
    h: OperatorMatrix,
    channels: Vec<JumpChannel>,
    /// `Σ r L†L`.
    decay: OperatorMatrix,
    stiffness: f64,
}

impl DenseGenerator {
    pub fn new(h: OperatorMatrix, channels: Vec<JumpChannel>) -> Result<Self> {
        let n = h.dim();
        if !h.is_hermitian(crate::hilbert::HERMITIAN_INPUT_TOL) {
            return invalid("generator Hamiltonian is not Hermitian");
        }
        let mut decay = OperatorMatrix::zeros(n);
        let mut max_rate = 0.0f64;
        for ch in &channels {
            if ch.operator.dim() != n {
                return invalid(format!("channel operator has dim {} but Hamiltonian has dim {n}", ch.operator.dim()));
            }
            if !(ch.rate >= 0.0) {
                return invalid(format!("channel rate must be >= 0, got {}", ch.rate));
            }
            decay = &decay + &(&ch.operator.dagger() * &ch.operator).scale_real(ch.rate);
            max_rate = max_rate.max(ch.rate);
        }
        let e = eigenvalues_hermitian(&h);
        let spread = e.last().unwrap() - e.first().unwrap();
        let outflow = eigenvalues_hermitian(&decay.hermitized()).last().copied().unwrap_or(0.0);
        let stiffness = h.max_abs().max(max_rate).max(spread).max(2.0 * outflow);
        Ok(Self { h, channels, decay, stiffness })
    }
}

impl Generator for DenseGenerator {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn to_working(&self, rho: &OperatorMatrix) -> OperatorMatrix {
        rho.clone()
    }

    fn from_working(&self, rho: &OperatorMatrix) -> OperatorMatrix {
        rho.clone()
    }

    fn apply(&self, rho: &OperatorMatrix) -> OperatorMatrix {
        let mut out = self.h.commutator(rho).scale(C64::new(0.0, -1.0));
        out = &out - &(&(&self.decay * rho) + &(rho * &self.decay));
        for ch in &self.channels {
            let gain = &(&ch.operator * rho) * &ch.operator.dagger();
            out = &out + &gain.scale_real(2.0 * ch.rate);
        }
        out
    }

    fn stiffness(&self) -> f64 {
        self.stiffness
    }
}

/// Eigenbasis generator for channels of the form `|e_i⟩⟨e_j|`.
///
/// With rates `R[(i, j)]` and outflow `Γ_j = Σ_i R[(i, j)]`, the working-basis
/// generator is
/// `ρ̇_ab = −(i(e_a − e_b) + Γ_a + Γ_b) ρ_ab + δ_ab · 2 Σ_j R[(a, j)] ρ_jj`.
#[derive(Clone, Debug)]
pub struct EigenGenerator {
    basis: OperatorMatrix,
    coherence: DMatrix<C64>,
    transfer: DMatrix<f64>,
    stiffness: f64,
}

impl EigenGenerator {
    pub fn new(set: &ChannelSet) -> Self {
        let e = &set.eigen.values;
        let n = e.len();
        let rates = set.rate_matrix();
        let outflow: Vec<f64> = (0..n).map(|j| rates.column(j).sum()).collect();
        let coherence = DMatrix::from_fn(n, n, |a, b| C64::new(-(outflow[a] + outflow[b]), -(e[a] - e[b])));
        let spread = e[n - 1] - e[0];
        let h_max = set.eigen.from_eigenbasis(&OperatorMatrix::from_real_diagonal(e)).max_abs();
        let max_out = outflow.iter().copied().fold(0.0, f64::max);
        let stiffness = h_max.max(set.max_rate()).max(spread).max(2.0 * max_out);
        Self { basis: set.eigen.vectors.clone(), coherence, transfer: rates.scale(2.0), stiffness }
    }
}

impl Generator for EigenGenerator {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn to_working(&self, rho: &OperatorMatrix) -> OperatorMatrix {
        let v = self.basis.matrix();
        OperatorMatrix::wrap(v.adjoint() * rho.matrix() * v)
    }

    fn from_working(&self, rho: &OperatorMatrix) -> OperatorMatrix {
        let v = self.basis.matrix();
        OperatorMatrix::wrap(v * rho.matrix() * v.adjoint())
    }

    fn apply(&self, rho: &OperatorMatrix) -> OperatorMatrix {
        let mut out = OperatorMatrix::zeros(rho.dim());
        self.apply_into(rho, &mut out);
        out
    }

    fn apply_into(&self, rho: &OperatorMatrix, out: &mut OperatorMatrix) {
        let m = rho.matrix();
        let n = m.nrows();
        let o = out.matrix_mut();
        for ((dst, c), x) in o.as_mut_slice().iter_mut().zip(self.coherence.as_slice()).zip(m.as_slice()) {
            *dst = c * x;
        }
        for a in 0..n {
            let gain: f64 = (0..n).map(|j| self.transfer[(a, j)] * m[(j, j)].re).sum();
            o[(a, a)] += C64::new(gain, 0.0);
        }
    }

    fn stiffness(&self) -> f64 {
        self.stiffness
    }
}

/// Scratch matrices for [`step_rk4_in_place`].
#[derive(Clone, Debug)]
pub struct Rk4Workspace {
    k: [OperatorMatrix; 4],
    stage: OperatorMatrix,
}

impl Rk4Workspace {
    pub fn new(dim: usize) -> Self {
        let z = OperatorMatrix::zeros(dim);
        Self { k: [z.clone(), z.clone(), z.clone(), z.clone()], stage: z }
    }
}

/// One classic fourth-order Runge–Kutta step, followed by `(ρ + ρ†)/2`.
///
/// The trace is not renormalized. `dt` must be positive.
pub fn step_rk4<G: Generator + ?Sized>(rho: &OperatorMatrix, dt: f64, gen: &G) -> OperatorMatrix {
    let mut out = rho.clone();
    step_rk4_in_place(&mut out, dt, gen, &mut Rk4Workspace::new(rho.dim()));
    out
}

/// [`step_rk4`] reusing caller-owned scratch space.
pub fn step_rk4_in_place<G: Generator + ?Sized>(rho: &mut OperatorMatrix, dt: f64, gen: &G, ws: &mut Rk4Workspace) {
    debug_assert!(dt > 0.0);
    let [k1, k2, k3, k4] = &mut ws.k;
    let stage = &mut ws.stage;
    gen.apply_into(rho, k1);
    shift_into(stage, rho, k1, dt / 2.0);
    gen.apply_into(stage, k2);
    shift_into(stage, rho, k2, dt / 2.0);
    gen.apply_into(stage, k3);
    shift_into(stage, rho, k3, dt);
    gen.apply_into(stage, k4);

    let w = dt / 6.0;
    let (a, b, c, d) = (k1.matrix().as_slice(), k2.matrix().as_slice(), k3.matrix().as_slice(), k4.matrix().as_slice());
    let out = rho.matrix_mut();
    for (i, o) in out.as_mut_slice().iter_mut().enumerate() {
        *o += ((a[i] + d[i]) + (b[i] + c[i]) * 2.0) * w;
    }
    for z in out.as_mut_slice() {
        flush_tiny(&mut z.re);
        flush_tiny(&mut z.im);
    }
    let n = out.nrows();
    for col in 0..n {
        out[(col, col)].im = 0.0;
        for row in (col + 1)..n {
            let avg = (out[(row, col)] + out[(col, row)].conj()) * 0.5;
            out[(row, col)] = avg;
            out[(col, row)] = avg.conj();
        }
    }
}

/// Entries this small are set to zero after each step. Decaying coherences
/// otherwise sink into subnormal floats, which are very slow on most CPUs.
pub const FLUSH_FLOOR: f64 = 1e-200;

fn flush_tiny(x: &mut f64) {
    if x.abs() < FLUSH_FLOOR {
        *x = 0.0;
    }
}

/// `dst = ρ + h·k`.
fn shift_into(dst: &mut OperatorMatrix, rho: &OperatorMatrix, k: &OperatorMatrix, h: f64) {
    for ((o, r), x) in dst.matrix_mut().as_mut_slice().iter_mut().zip(rho.matrix().as_slice()).zip(k.matrix().as_slice()) {
        *o = r + x * h;
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum InitialState {
    /// `|0…0⟩⟨0…0|`.
    #[default]
    Vacuum,
    Custom(OperatorMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionSpec {
    pub t_end: f64,
    pub dt: f64,
    /// Steps between recorded samples.
    pub record_every: usize,
    pub initial_state: InitialState,
}

impl EvolutionSpec {
    /// Picks `dt` so that samples land exactly every `sample_interval` and
    /// `dt ≤ 1 / (STEPS_PER_TIMESCALE · stiffness)`.
    pub fn on_sample_grid(t_end: f64, sample_interval: f64, stiffness: f64) -> Result<Self> {
        if !(sample_interval > 0.0) || !sample_interval.is_finite() {
            return invalid(format!("sample interval must be > 0, got {sample_interval}"));
        }
        let steps = (sample_interval * STEPS_PER_TIMESCALE * stiffness).ceil().max(1.0);
        if steps > 1e9 {
            return invalid("generator too stiff for the requested sample interval");
        }
        let spec = Self {
            t_end,
            dt: sample_interval / steps,
            record_every: steps as usize,
            initial_state: InitialState::Vacuum,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return invalid(format!("dt must be finite and > 0, got {}", self.dt));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return invalid(format!("t_end must be finite and >= dt, got {}", self.t_end));
        }
        if self.record_every == 0 {
            return invalid("record_every must be >= 1");
        }
        Ok(())
    }

    /// `floor(t_end / (dt·record_every)) + 1`.
    pub fn sample_count(&self) -> usize {
        // tolerate t_end landing a rounding error short of a grid point
        let ratio = self.t_end / (self.dt * self.record_every as f64);
        (ratio * (1.0 + 1e-12)).floor() as usize + 1
    }

    pub fn sample_time(&self, k: usize) -> f64 {
        (k * self.record_every) as f64 * self.dt
    }
}

/// What to measure at each recorded sample.
#[derive(Clone, Debug)]
pub struct Observables {
    pub layout: ModeLayout,
    /// Mode indices of the tracked cells.
    pub cells: Vec<usize>,
    pub omega_cell: f64,
    /// Hamiltonian for total energy and global ergotropy.
    pub system_h: OperatorMatrix,
    system_spectrum: Vec<f64>,
}

impl Observables {
    pub fn new(layout: ModeLayout, cells: Vec<usize>, omega_cell: f64, system_h: OperatorMatrix) -> Result<Self> {
        if system_h.dim() != layout.dim() {
            return invalid("system Hamiltonian does not match the layout");
        }
        if let Some(&bad) = cells.iter().find(|&&c| c >= layout.mode_count()) {
            return invalid(format!("tracked mode {bad} out of range"));
        }
        if !system_h.is_hermitian(HERMITIAN_INPUT_TOL) {
            return invalid("system Hamiltonian is not Hermitian");
        }
        let system_spectrum = eigenvalues_hermitian(&system_h);
        Ok(Self { layout, cells, omega_cell, system_h, system_spectrum })
    }

    pub fn cell_labels(&self) -> Vec<String> {
        self.cells.iter().map(|&c| self.layout.labels()[c].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub time: f64,
    /// One entry per tracked cell.
    pub cell_ergotropy: Vec<f64>,
    pub global_ergotropy: f64,
    pub total_energy: f64,
    pub trace: f64,
    pub purity: f64,
    pub max_hermiticity_defect: f64,
    /// Smallest eigenvalue over the tracked reduced states.
    pub min_reduced_eigenvalue: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub cell_labels: Vec<String>,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    /// Ergotropy series of tracked cell `k`.
    pub fn cell_series(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.cell_ergotropy[k]).collect()
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.samples.iter().map(|s| (s.trace - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.samples.iter().map(|s| s.min_reduced_eigenvalue).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureInfo {
    pub last_good_time: f64,
    pub reason: String,
}

/// A trajectory plus the reason it stopped early, if it did.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub failure: Option<FailureInfo>,
    /// Final state in the Fock basis (last recorded sample).
    pub final_state: OperatorMatrix,
}

/// Integrates and records observables; failures are reported in the outcome.
pub fn run_evolution<G: Generator + ?Sized>(spec: &EvolutionSpec, gen: &G, observables: &Observables) -> Result<RunOutcome> {
    spec.validate()?;
    let n = gen.dim();
    if observables.layout.dim() != n {
        return invalid(format!("observables expect dim {} but generator has dim {n}", observables.layout.dim()));
    }
    let rho0 = match &spec.initial_state {
        InitialState::Vacuum => OperatorMatrix::basis_projector(n, 0)?,
        InitialState::Custom(rho) => {
            if rho.dim() != n {
                return invalid(format!("initial state has dim {} but generator has dim {n}", rho.dim()));
            }
            rho.validate_density(&DensityTolerance::STRICT)?;
            rho.clone()
        }
    };

    let mut trajectory = Trajectory { cell_labels: observables.cell_labels(), samples: Vec::new() };
    let mut working = gen.to_working(&rho0);
    let mut workspace = Rk4Workspace::new(n);
    let mut last_state = rho0.clone();
    for k in 0..spec.sample_count() {
        if k > 0 {
            for _ in 0..spec.record_every {
                step_rk4_in_place(&mut working, spec.dt, gen, &mut workspace);
            }
        }
        let time = spec.sample_time(k);
        let rho = if k == 0 { rho0.clone() } else { gen.from_working(&working) };
        match observe(time, &rho, observables) {
            Ok(sample) => {
                trajectory.samples.push(sample);
                last_state = rho;
            }
            Err(reason) => {
                let last_good_time = trajectory.samples.last().map_or(0.0, |s| s.time);
                return Ok(RunOutcome {
                    trajectory,
                    failure: Some(FailureInfo { last_good_time, reason: format!("t = {time}: {reason}") }),
                    final_state: last_state,
                });
            }
        }
    }
    Ok(RunOutcome { trajectory, failure: None, final_state: last_state })
}

/// Integrates and records observables; an early stop is an error.
pub fn evolve<G: Generator + ?Sized>(spec: &EvolutionSpec, gen: &G, observables: &Observables) -> Result<Trajectory> {
    let outcome = run_evolution(spec, gen, observables)?;
    match outcome.failure {
        None => Ok(outcome.trajectory),
        Some(f) => Err(Error::Integration { last_good_time: f.last_good_time, reason: f.reason }),
    }
}

fn observe(time: f64, rho: &OperatorMatrix, obs: &Observables) -> std::result::Result<Sample, String> {
    if rho.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err("state has non-finite entries".into());
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > TRACE_DRIFT_LIMIT {
        return Err(format!("trace drifted to {trace}"));
    }
    let tol = DensityTolerance { hermitian: 1e-8, trace: TRACE_DRIFT_LIMIT, eigenvalue: f64::INFINITY };
    let mut cell_ergotropy = Vec::with_capacity(obs.cells.len());
    let mut min_reduced_eigenvalue = f64::INFINITY;
    for &cell in &obs.cells {
        let report = local_ergotropy_with_tolerance(rho, cell, &obs.layout, obs.omega_cell, &tol).map_err(|e| e.to_string())?;
        let lowest = report.spectrum_rho.last().copied().unwrap_or(0.0);
        min_reduced_eigenvalue = min_reduced_eigenvalue.min(lowest);
        cell_ergotropy.push(report.ergotropy);
    }
    if min_reduced_eigenvalue < -POSITIVITY_LIMIT {
        return Err(format!("reduced state eigenvalue {min_reduced_eigenvalue:.3e} below -{POSITIVITY_LIMIT:e}"));
    }
    let global = ergotropy_with_spectrum(rho, &obs.system_h, &obs.system_spectrum, &tol).map_err(|e| e.to_string())?;
    Ok(Sample {
        time,
        cell_ergotropy,
        global_ergotropy: global.ergotropy,
        total_energy: global.energy,
        trace,
        purity: rho.purity(),
        max_hermiticity_defect: rho.hermiticity_defect(),
        min_reduced_eigenvalue,
    })
}
