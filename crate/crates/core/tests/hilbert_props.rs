mod common;

use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qbattery::hilbert::{destroy_op, eig_hermitian, embed, expect, partial_trace, DensityTolerance, ModeLayout, OperatorMatrix};

fn spectral_norm(op: &OperatorMatrix) -> f64 {
    op.matrix().clone().singular_values().iter().copied().fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), dim in 1usize..=12) {
        let mut r = rng(seed);
        let h = random_hermitian(dim, &mut r);
        let eig = eig_hermitian(&h).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let v = eig.vectors.matrix();
        let gram = v.adjoint() * v;
        let id = nalgebra::DMatrix::<C64>::identity(dim, dim);
        prop_assert!((gram - &id).iter().all(|z| z.norm() < 1e-10));
        let back = eig.from_eigenbasis(&OperatorMatrix::from_real_diagonal(&eig.values));
        prop_assert!(back.max_abs_diff(&h) < 1e-8);
    }

    #[test]
    fn partial_trace_yields_density(seed in any::<u64>(), cutoff in 2usize..=3, modes in 1usize..=3, keep in 0usize..3) {
        let keep = keep % modes;
        let layout = ModeLayout::uniform(modes, cutoff).unwrap();
        let mut r = rng(seed);
        let rho = random_density(layout.dim(), &mut r);
        let reduced = partial_trace(&rho, keep, &layout).unwrap();
        prop_assert_eq!(reduced.dim(), cutoff);
        prop_assert!((reduced.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(reduced.validate_density(&DensityTolerance::STRICT).is_ok());
    }

    #[test]
    fn pure_bipartite_marginals_share_spectrum(seed in any::<u64>(), cutoff in 2usize..=4) {
        let layout = ModeLayout::uniform(2, cutoff).unwrap();
        let mut r = rng(seed);
        let psi = random_pure(layout.dim(), &mut r);
        let mut a = eigenvalues(&partial_trace(&psi, 0, &layout).unwrap());
        let mut b = eigenvalues(&partial_trace(&psi, 1, &layout).unwrap());
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn embed_preserves_hermiticity_and_norm(seed in any::<u64>(), cutoff in 2usize..=3, idx in 0usize..3) {
        let layout = ModeLayout::uniform(3, cutoff).unwrap();
        let mut r = rng(seed);
        let local = random_hermitian(cutoff, &mut r);
        let big = embed(&local, idx, &layout).unwrap();
        prop_assert!(big.hermiticity_defect() == 0.0);
        prop_assert!((spectral_norm(&big) - spectral_norm(&local)).abs() < 1e-10);
    }

    #[test]
    fn expect_matches_elementwise_sum(seed in any::<u64>(), dim in 1usize..=8) {
        let mut r = rng(seed);
        let rho = random_density(dim, &mut r);
        let h = random_hermitian(dim, &mut r);
        let mut sum = C64::new(0.0, 0.0);
        for a in 0..dim {
            for b in 0..dim {
                sum += rho.get(a, b) * h.get(b, a);
            }
        }
        let got = expect(&rho, &h).unwrap();
        prop_assert!((got - sum).norm() < 1e-12);
        prop_assert!(got.im.abs() < 1e-10);
        prop_assert!((expect(&rho, &OperatorMatrix::identity(dim)).unwrap().re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn embedded_ladders_on_different_modes_commute() {
    let layout = ModeLayout::uniform(2, 3).unwrap();
    let a = destroy_op(3).unwrap();
    let x = embed(&a, 0, &layout).unwrap();
    let y = embed(&a.dagger(), 1, &layout).unwrap();
    assert_eq!(x.commutator(&y).max_abs(), 0.0);
}

#[test]
fn maximally_mixed_reduces_to_maximally_mixed() {
    let layout = ModeLayout::uniform(3, 2).unwrap();
    let rho = OperatorMatrix::identity(8).scale_real(1.0 / 8.0);
    for k in 0..3 {
        let red = partial_trace(&rho, k, &layout).unwrap();
        assert!(red.max_abs_diff(&OperatorMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }
}
