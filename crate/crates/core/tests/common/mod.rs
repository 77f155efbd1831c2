//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use qbattery::bath::JumpChannel;
use qbattery::hilbert::OperatorMatrix;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn ginibre(dim: usize, rng: &mut StdRng) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of R's diagonal divided out.
pub fn haar_unitary(dim: usize, rng: &mut StdRng) -> DMatrix<C64> {
    let qr = ginibre(dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = d / C64::new(d.norm(), 0.0);
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_hermitian(dim: usize, rng: &mut StdRng) -> OperatorMatrix {
    let g = ginibre(dim, rng);
    OperatorMatrix::from_matrix((&g + g.adjoint()).scale(0.5)).unwrap()
}

/// Random full-rank density matrix `GG† / Tr(GG†)`.
pub fn random_density(dim: usize, rng: &mut StdRng) -> OperatorMatrix {
    let g = ginibre(dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = m / tr;
    OperatorMatrix::from_matrix((&m + m.adjoint()).scale(0.5)).unwrap()
}

pub fn random_pure(dim: usize, rng: &mut StdRng) -> OperatorMatrix {
    let v = ginibre(dim, rng).column(0).into_owned();
    let v = &v / C64::new(v.norm(), 0.0);
    OperatorMatrix::from_matrix(&v * v.adjoint()).unwrap().hermitized()
}

pub fn eigenvalues(op: &OperatorMatrix) -> Vec<f64> {
    op.matrix().clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Minimum of `Σ p_σ(k) ε_k` over all permutations σ.
pub fn brute_force_passive(rho: &OperatorMatrix, h: &OperatorMatrix) -> f64 {
    let p = eigenvalues(rho);
    let e = eigenvalues(h);
    (0..p.len())
        .permutations(p.len())
        .map(|perm| perm.iter().zip(&e).map(|(&i, ek)| p[i] * ek).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn energy(rho: &OperatorMatrix, h: &OperatorMatrix) -> f64 {
    (rho.matrix() * h.matrix()).trace().re
}

pub fn conjugate(u: &DMatrix<C64>, op: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix::from_matrix(u * op.matrix() * u.adjoint()).unwrap().hermitized()
}

/// Column-stacked Liouvillian: `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
pub fn liouvillian(h: &OperatorMatrix, channels: &[JumpChannel]) -> DMatrix<C64> {
    let n = h.dim();
    let id = DMatrix::<C64>::identity(n, n);
    let hm = h.matrix();
    let minus_i = C64::new(0.0, -1.0);
    let mut sup = (id.kronecker(hm) - hm.transpose().kronecker(&id)) * minus_i;
    for ch in channels {
        let l = ch.operator.matrix();
        let ldl = l.adjoint() * l;
        let r = C64::new(ch.rate, 0.0);
        sup += (l.conjugate().kronecker(l) * C64::new(2.0, 0.0) - id.kronecker(&ldl) - ldl.transpose().kronecker(&id)) * r;
    }
    sup
}

/// `exp(L t) vec(ρ)` reshaped back to a matrix.
pub fn expm_propagate(sup: &DMatrix<C64>, rho: &OperatorMatrix, t: f64) -> OperatorMatrix {
    let n = rho.dim();
    let prop = (sup * C64::new(t, 0.0)).exp();
    let v = nalgebra::DVector::from_column_slice(rho.matrix().as_slice());
    let out = prop * v;
    OperatorMatrix::from_matrix(DMatrix::from_column_slice(n, n, out.as_slice())).unwrap()
}

/// Minimal-cell system at the distance-sweep preset row (resonant frame, vacuum start).
pub fn fig2a_config(cutoff: usize) -> (qbattery::model::SystemConfig, qbattery::bath::BathConfig) {
    let system = qbattery::model::SystemConfig {
        n_layers: 1,
        omega_c: 4.0,
        omega_cell: 4.0,
        g: 0.01,
        t_e: 0.001,
        s: 1.0,
        drive_amplitude: 0.1,
        drive_frequency: 4.0,
        cutoff,
        coupling_law: "exp".into(),
    };
    let bath = qbattery::bath::BathConfig { temperature: 250.0, ..Default::default() };
    (system, bath)
}

/// Integrates `steps` RK4 steps of size `dt` from `rho` (Fock basis in and out).
pub fn integrate<G: qbattery::dynamics::Generator>(gen: &G, rho: &OperatorMatrix, dt: f64, steps: usize) -> OperatorMatrix {
    let mut w = gen.to_working(rho);
    for _ in 0..steps {
        w = qbattery::dynamics::step_rk4(&w, dt, gen);
    }
    gen.from_working(&w)
}
