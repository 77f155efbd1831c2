//! Ergotropy via the passive-state construction.
//!
//! The passive energy pairs the populations of `ρ` in descending order with the
//! energies of `H` in ascending order, which is the exact minimum of
//! `Tr[UρU†H]` over unitaries.

use crate::error::{invalid, Result};
use crate::hilbert::{check_min_eigenvalue, eigenvalues_hermitian, expect, number_op, partial_trace, DensityTolerance, ModeLayout, OperatorMatrix, HERMITIAN_INPUT_TOL};

#[derive(Clone, Debug, PartialEq)]
pub struct ErgotropyReport {
    /// `Tr[ρH]`.
    pub energy: f64,
    pub passive_energy: f64,
    pub ergotropy: f64,
    /// Eigenvalues of `ρ`, descending.
    pub spectrum_rho: Vec<f64>,
    /// Eigenvalues of `H`, ascending.
    pub spectrum_h: Vec<f64>,
}

pub fn compute_ergotropy(rho: &OperatorMatrix, h: &OperatorMatrix) -> Result<ErgotropyReport> {
    ergotropy_with_tolerance(rho, h, &DensityTolerance::STRICT)
}

/// [`compute_ergotropy`] with caller-chosen density-matrix tolerances.
pub fn ergotropy_with_tolerance(rho: &OperatorMatrix, h: &OperatorMatrix, tol: &DensityTolerance) -> Result<ErgotropyReport> {
    if rho.dim() != h.dim() {
        return invalid(format!("dimension mismatch: state {} vs Hamiltonian {}", rho.dim(), h.dim()));
    }
    if !h.is_hermitian(HERMITIAN_INPUT_TOL) {
        return invalid("Hamiltonian is not Hermitian");
    }
    ergotropy_with_spectrum(rho, h, &eigenvalues_hermitian(h), tol)
}

/// Ergotropy against `h` whose ascending spectrum is already known.
pub fn ergotropy_with_spectrum(rho: &OperatorMatrix, h: &OperatorMatrix, spectrum_h: &[f64], tol: &DensityTolerance) -> Result<ErgotropyReport> {
    if rho.dim() != h.dim() || spectrum_h.len() != h.dim() {
        return invalid(format!("dimension mismatch: state {}, Hamiltonian {}, spectrum {}", rho.dim(), h.dim(), spectrum_h.len()));
    }
    rho.validate_density(&DensityTolerance { eigenvalue: f64::INFINITY, ..*tol })?;
    let mut spectrum_rho = eigenvalues_hermitian(rho);
    check_min_eigenvalue(spectrum_rho.first().copied(), tol)?;
    spectrum_rho.reverse();
    let energy = expect(rho, h)?.re;
    let passive_energy = passive_energy(&spectrum_rho, spectrum_h);
    Ok(ErgotropyReport { energy, passive_energy, ergotropy: energy - passive_energy, spectrum_rho, spectrum_h: spectrum_h.to_vec() })
}

/// `Σ r_k ε_k` for populations sorted descending and energies ascending.
pub fn passive_energy(populations_desc: &[f64], energies_asc: &[f64]) -> f64 {
    populations_desc.iter().zip(energies_asc).map(|(r, e)| r * e).sum()
}

/// Ergotropy of one mode against its bare Hamiltonian `ω·n̂`.
pub fn local_ergotropy(rho_full: &OperatorMatrix, cell_index: usize, layout: &ModeLayout, omega_cell: f64) -> Result<ErgotropyReport> {
    local_ergotropy_with_tolerance(rho_full, cell_index, layout, omega_cell, &DensityTolerance::STRICT)
}

pub fn local_ergotropy_with_tolerance(
    rho_full: &OperatorMatrix,
    cell_index: usize,
    layout: &ModeLayout,
    omega_cell: f64,
    tol: &DensityTolerance,
) -> Result<ErgotropyReport> {
    let reduced = partial_trace(rho_full, cell_index, layout)?;
    let h = number_op(layout.cutoff()).scale_real(omega_cell);
    ergotropy_with_tolerance(&reduced, &h, tol)
}
