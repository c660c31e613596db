use num_complex::Complex64;
use proptest::prelude::*;
use q4nl::functionals::{energy, h2_distance, mass, spectral_mass};
use q4nl::initial::{make_initial, InitialKind, InitialParams};
use q4nl::{strang_step, Coupling, FieldState, Grid, Kappa, SystemParams};

fn packet(g: &Grid, sys: &SystemParams, seed: u64) -> FieldState {
    let p = InitialParams {
        width: 1.5,
        spectral_width: 1.0,
        ..Default::default()
    };
    make_initial(InitialKind::RandomSchwartz, &p, g, sys, seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn step_commutes_with_global_phase(seed in 0u64..1000, theta in -3.0f64..3.0, dt in 1e-3f64..5e-2) {
        let g = Grid::from_parts(1, 128, 40.0).unwrap();
        let sys = SystemParams::single(2.0, Kappa::One, 1.0).unwrap();
        let s = packet(&g, &sys, seed);
        let rot = Complex64::from_polar(1.0, theta);
        let a = strang_step(&s.scaled(rot), &g, &sys, dt);
        let b = strang_step(&s, &g, &sys, dt).scaled(rot);
        prop_assert!(h2_distance(&a, &b, &g) < 1e-11);
    }

    #[test]
    fn parseval(seed in 0u64..1000) {
        let g = Grid::from_parts(2, 32, 24.0).unwrap();
        let sys = SystemParams::single(1.0, Kappa::Zero, 1.0).unwrap();
        let s = packet(&g, &sys, seed);
        let mut spec = s.components[0].clone();
        g.forward(&mut spec);
        let m = mass(&s, &g)[0];
        prop_assert!((spectral_mass(&g, &spec) - m).abs() <= 1e-12 * m);
    }

    #[test]
    fn relabelling_components_commutes_with_the_step(seed in 0u64..1000, b01 in 0.0f64..1.0, b11 in 0.1f64..2.0) {
        let g = Grid::from_parts(1, 128, 40.0).unwrap();
        let gamma = Coupling::from_rows(&[vec![1.0, b01], vec![b01, b11]]).unwrap();
        let sys = SystemParams::from_gamma(2.0, Kappa::One, gamma).unwrap();
        let a = packet(&g, &SystemParams::single(2.0, Kappa::One, 1.0).unwrap(), seed);
        let b = packet(&g, &SystemParams::single(2.0, Kappa::One, 1.0).unwrap(), seed + 1);
        let s = FieldState::new(0.0, vec![a.components[0].clone(), b.components[0].clone()]);
        let swapped = FieldState::new(0.0, vec![s.components[1].clone(), s.components[0].clone()]);
        let sys_swapped = sys.permuted(&[1, 0]).unwrap();
        let out = strang_step(&s, &g, &sys, 0.01);
        let out_swapped = strang_step(&swapped, &g, &sys_swapped, 0.01);
        let back = FieldState::new(out.t, vec![out_swapped.components[1].clone(), out_swapped.components[0].clone()]);
        prop_assert!(h2_distance(&out, &back, &g) < 1e-13);
        let e1 = energy(&s, &g, &sys).total;
        let e2 = energy(&swapped, &g, &sys_swapped).total;
        prop_assert!((e1 - e2).abs() <= 1e-12 * e1.abs());
    }
}
