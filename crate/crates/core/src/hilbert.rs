//! Dense operator algebra on a truncated multimode Fock space.
//!
//! Every mode shares one Fock cutoff. Basis states are ordered with mode 0 as
//! the most significant digit, so `embed(op, 0, ..)` is `op ⊗ I ⊗ … ⊗ I`.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};

/// Entrywise tolerance accepted by [`eig_hermitian`] for the Hermiticity
/// precondition.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;

/// Dense complex square matrix used for operators and density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    data: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn from_matrix(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() == 0 || data.nrows() != data.ncols() {
            return invalid(format!(
                "operator must be square with dim >= 1, got {}x{}",
                data.nrows(),
                data.ncols()
            ));
        }
        Ok(Self { data })
    }

    /// Builds a `dim × dim` operator from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return invalid(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                entries.len()
            ));
        }
        Ok(Self { data: DMatrix::from_row_slice(dim, dim, entries) })
    }

    pub(crate) fn wrap(data: DMatrix<C64>) -> Self {
        debug_assert!(data.is_square() && data.nrows() > 0);
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::wrap(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::wrap(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::wrap(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |r, c| if r == c { C64::new(diag[r], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &DVector<C64>, bra: &DVector<C64>) -> Result<Self> {
        if ket.len() != bra.len() || ket.is_empty() {
            return invalid("outer product of vectors with different lengths");
        }
        Ok(Self::wrap(ket * bra.adjoint()))
    }

    /// Pure-state projector onto the Fock basis state with flat index `index`.
    pub fn basis_projector(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return invalid(format!("basis index {index} out of range for dim {dim}"));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(index, index)] = C64::new(1.0, 0.0);
        Ok(Self::wrap(m))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self::wrap(self.data.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::wrap(&self.data * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self::wrap(&self.data * &other.data - &other.data * &self.data)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::wrap(self.data.kronecker(&other.data))
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(self + self†) / 2`.
    pub fn hermitized(&self) -> Self {
        Self::wrap((&self.data + self.data.adjoint()).scale(0.5))
    }

    /// `Tr ρ²` for a Hermitian `ρ`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Checks the density-matrix invariants within `tol`.
    pub fn validate_density(&self, tol: &DensityTolerance) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol.hermitian {
            return invalid(format!("density matrix not Hermitian (defect {defect:.3e})"));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return invalid(format!("density matrix trace {tr} differs from 1"));
        }
        if tol.eigenvalue.is_finite() {
            check_min_eigenvalue(eigenvalues_hermitian(self).first().copied(), tol)?;
        }
        Ok(())
    }
}

/// Rejects a lowest eigenvalue below `-tol.eigenvalue`.
pub(crate) fn check_min_eigenvalue(min: Option<f64>, tol: &DensityTolerance) -> Result<()> {
    let min = min.unwrap_or(0.0);
    if min < -tol.eigenvalue {
        return invalid(format!("density matrix has negative eigenvalue {min:.3e}"));
    }
    Ok(())
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::wrap(&self.data + &rhs.data)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::wrap(&self.data - &rhs.data)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix::wrap(&self.data * &rhs.data)
    }
}

/// Tolerances for the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityTolerance {
    pub hermitian: f64,
    pub trace: f64,
    pub eigenvalue: f64,
}

impl DensityTolerance {
    /// Tolerances for a freshly prepared state.
    pub const STRICT: Self = Self { hermitian: 1e-12, trace: 1e-10, eigenvalue: 1e-10 };

    /// Tolerances matching the integrator's abort thresholds.
    pub const INTEGRATED: Self = Self { hermitian: 1e-8, trace: 1e-6, eigenvalue: 1e-6 };
}

impl Default for DensityTolerance {
    fn default() -> Self {
        Self::STRICT
    }
}

/// Mode bookkeeping for the tensor-product space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeLayout {
    cutoff: usize,
    labels: Vec<String>,
}

impl ModeLayout {
    pub fn new(cutoff: usize, labels: Vec<String>) -> Result<Self> {
        if cutoff == 0 {
            return invalid("Fock cutoff must be positive");
        }
        if labels.is_empty() {
            return invalid("layout needs at least one mode");
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return invalid(format!("duplicate mode label {l:?}"));
            }
        }
        let layout = Self { cutoff, labels };
        if layout.checked_dim().is_none() {
            return invalid("Hilbert-space dimension overflows usize");
        }
        Ok(layout)
    }

    /// Layout with generic labels `m0, m1, …`.
    pub fn uniform(mode_count: usize, cutoff: usize) -> Result<Self> {
        Self::new(cutoff, (0..mode_count).map(|i| format!("m{i}")).collect())
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn mode_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn checked_dim(&self) -> Option<usize> {
        self.labels.iter().try_fold(1usize, |acc, _| acc.checked_mul(self.cutoff))
    }

    /// `cutoff^mode_count`.
    pub fn dim(&self) -> usize {
        self.checked_dim().expect("checked at construction")
    }

    /// Dimension of the modes before and after `mode_index`.
    fn split(&self, mode_index: usize) -> (usize, usize) {
        let left = self.cutoff.pow(mode_index as u32);
        let right = self.cutoff.pow((self.mode_count() - mode_index - 1) as u32);
        (left, right)
    }
}

/// Truncated annihilation operator with `√n` on the superdiagonal.
pub fn destroy_op(cutoff: usize) -> Result<OperatorMatrix> {
    if cutoff < 2 {
        return invalid(format!("annihilation operator needs cutoff >= 2, got {cutoff}"));
    }
    Ok(OperatorMatrix::from_fn(cutoff, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// `diag(0, 1, …, cutoff − 1)`.
pub fn number_op(cutoff: usize) -> OperatorMatrix {
    let diag: Vec<f64> = (0..cutoff).map(|n| n as f64).collect();
    OperatorMatrix::from_real_diagonal(&diag)
}

/// Places a single-mode operator at `mode_index`, identities elsewhere.
pub fn embed(local: &OperatorMatrix, mode_index: usize, layout: &ModeLayout) -> Result<OperatorMatrix> {
    if local.dim() != layout.cutoff() {
        return invalid(format!(
            "local operator has dim {} but layout cutoff is {}",
            local.dim(),
            layout.cutoff()
        ));
    }
    if mode_index >= layout.mode_count() {
        return invalid(format!(
            "mode index {mode_index} out of range for {} modes",
            layout.mode_count()
        ));
    }
    let (left, right) = layout.split(mode_index);
    let out = DMatrix::<C64>::identity(left, left)
        .kronecker(local.matrix())
        .kronecker(&DMatrix::<C64>::identity(right, right));
    Ok(OperatorMatrix::wrap(out))
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: OperatorMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> DVector<C64> {
        self.vectors.matrix().column(k).into_owned()
    }

    /// `V† · op · V`.
    pub fn to_eigenbasis(&self, op: &OperatorMatrix) -> OperatorMatrix {
        let v = self.vectors.matrix();
        OperatorMatrix::wrap(v.adjoint() * op.matrix() * v)
    }

    /// `V · op · V†`.
    pub fn from_eigenbasis(&self, op: &OperatorMatrix) -> OperatorMatrix {
        let v = self.vectors.matrix();
        OperatorMatrix::wrap(v * op.matrix() * v.adjoint())
    }
}

pub fn eig_hermitian(op: &OperatorMatrix) -> Result<HermitianEigen> {
    let defect = op.hermiticity_defect();
    if defect > HERMITIAN_INPUT_TOL {
        return invalid(format!("operator is not Hermitian (defect {defect:.3e})"));
    }
    let eig = SymmetricEigen::new(op.hermitized().into_matrix());
    let n = op.dim();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep the solver's order
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors: OperatorMatrix::wrap(vectors) })
}

/// Ascending eigenvalues of a matrix assumed Hermitian (it is symmetrized first).
pub(crate) fn eigenvalues_hermitian(op: &OperatorMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = op.hermitized().into_matrix().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Reduced state of mode `keep_index`.
pub fn partial_trace(rho: &OperatorMatrix, keep_index: usize, layout: &ModeLayout) -> Result<OperatorMatrix> {
    if keep_index >= layout.mode_count() {
        return invalid(format!(
            "mode index {keep_index} out of range for {} modes",
            layout.mode_count()
        ));
    }
    if rho.dim() != layout.dim() {
        return invalid(format!(
            "state has dim {} but layout dimension is {}",
            rho.dim(),
            layout.dim()
        ));
    }
    let c = layout.cutoff();
    let (left, right) = layout.split(keep_index);
    let m = rho.matrix();
    let mut out = DMatrix::<C64>::zeros(c, c);
    for a in 0..c {
        for b in 0..c {
            let mut acc = C64::new(0.0, 0.0);
            for l in 0..left {
                let row0 = (l * c + a) * right;
                let col0 = (l * c + b) * right;
                for r in 0..right {
                    acc += m[(row0 + r, col0 + r)];
                }
            }
            out[(a, b)] = acc;
        }
    }
    Ok(OperatorMatrix::wrap(out))
}

/// `Tr(ρ · op)`.
pub fn expect(rho: &OperatorMatrix, op: &OperatorMatrix) -> Result<C64> {
    if rho.dim() != op.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", rho.dim(), op.dim()));
    }
    let (r, o) = (rho.matrix(), op.matrix());
    let n = rho.dim();
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            acc += r[(a, b)] * o[(b, a)];
        }
    }
    Ok(acc)
}
