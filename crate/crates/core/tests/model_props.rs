use proptest::prelude::*;
use qbattery::model::{build_hamiltonian, kappa, rotating_frame, total_number, SystemConfig};

fn config() -> impl Strategy<Value = SystemConfig> {
    (0usize..=2, 0.5..5.0f64, 0.0..0.5f64, 0.0..0.5f64, 0.0..4.0f64, 0.0..1.0f64).prop_map(|(n_layers, omega, g, t_e, s, f)| SystemConfig {
        n_layers,
        omega_c: omega,
        omega_cell: omega,
        g,
        t_e,
        s,
        drive_amplitude: f,
        drive_frequency: omega,
        cutoff: 2,
        coupling_law: "exp".into(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn static_part_is_hermitian_and_conserves_excitations(cfg in config()) {
        let parts = build_hamiltonian(&cfg).unwrap();
        prop_assert!(parts.h_static.hermiticity_defect() < 1e-12);
        prop_assert!(parts.h_static.commutator(&total_number(&parts.layout)).max_abs() < 1e-10);
        let h_rf = rotating_frame(&parts, cfg.drive_frequency);
        prop_assert!(h_rf.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn every_bond_scales_with_kappa(cfg in config(), ds in 0.1..2.0f64) {
        prop_assume!(cfg.n_layers >= 1 && (cfg.g > 1e-3 || cfg.t_e > 1e-3));
        let near = build_hamiltonian(&cfg).unwrap();
        let far_cfg = SystemConfig { s: cfg.s + ds * cfg.omega_cell, ..cfg.clone() };
        let far = build_hamiltonian(&far_cfg).unwrap();
        let factor = kappa(far_cfg.distance()).unwrap() / kappa(cfg.distance()).unwrap();
        prop_assert!((factor - (-ds).exp()).abs() < 1e-12);
        let dim = near.h_static.dim();
        for r in 0..dim {
            for c in 0..dim {
                if r == c {
                    prop_assert!((near.h_static.get(r, c) - far.h_static.get(r, c)).norm() < 1e-14);
                } else {
                    let expected = near.h_static.get(r, c) * factor;
                    prop_assert!((far.h_static.get(r, c) - expected).norm() < 1e-13);
                }
            }
        }
    }
}
