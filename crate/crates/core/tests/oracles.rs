//! Closed-form and quadrature oracles for the public API.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;
use q4nl::functionals::{h2_distance, lq_norm_total, mass, spectral_mass};
use q4nl::initial::{make_initial, InitialKind, InitialParams};
use q4nl::morawetz::{Morawetz, WeightSpec};
use q4nl::scattering::{gn_localized_ratio, spacetime_norm, Exponent, UNIT_CUBE};
use q4nl::{free_evolve, integrate, FieldState, Grid, Kappa, StepPlan, SystemParams};

fn gaussian_1d() -> (Grid, SystemParams, FieldState) {
    let g = Grid::from_parts(1, 256, 40.0).unwrap();
    let sys = SystemParams::single(1.0, Kappa::One, 1.0).unwrap();
    let p = InitialParams {
        width: 1.0 / 2f64.sqrt(),
        ..Default::default()
    };
    let s = make_initial(InitialKind::GaussianPacket, &p, &g, &sys, 0).unwrap();
    (g, sys, s)
}

#[test]
fn gaussian_mass_is_sqrt_pi() {
    let g = Grid::from_parts(1, 256, 40.0).unwrap();
    let sys = SystemParams::single(1.0, Kappa::One, 1.0).unwrap();
    let s = make_initial(InitialKind::GaussianPacket, &InitialParams::default(), &g, &sys, 0).unwrap();
    assert_relative_eq!(mass(&s, &g)[0], PI.sqrt(), max_relative = 1e-12);
    let mut spec = s.components[0].clone();
    g.forward(&mut spec);
    assert_relative_eq!(spectral_mass(&g, &spec), PI.sqrt(), max_relative = 1e-12);
}

#[test]
fn gaussian_l4_norm() {
    let g = Grid::from_parts(1, 256, 40.0).unwrap();
    let sys = SystemParams::single(1.0, Kappa::One, 1.0).unwrap();
    let s = make_initial(InitialKind::GaussianPacket, &InitialParams::default(), &g, &sys, 0).unwrap();
    let expect = (PI / 2.0).sqrt().powf(0.25);
    assert_relative_eq!(lq_norm_total(&s, &g, 4.0).unwrap(), expect, max_relative = 1e-12);
    let (g2, _, narrow) = gaussian_1d();
    let expect2 = (PI / 4.0).sqrt().powf(0.25);
    assert_relative_eq!(lq_norm_total(&narrow, &g2, 4.0).unwrap(), expect2, max_relative = 1e-12);
}

#[test]
fn free_group_law() {
    let g = Grid::from_parts(2, 64, 32.0).unwrap();
    let sys = SystemParams::single(1.0, Kappa::One, 0.0).unwrap();
    let p = InitialParams {
        width: 1.5,
        velocity: vec![0.5, -0.2],
        ..Default::default()
    };
    let s = make_initial(InitialKind::GaussianPacket, &p, &g, &sys, 0).unwrap();
    let a = free_evolve(&free_evolve(&s, &g, &sys, 0.3), &g, &sys, 0.45);
    let b = free_evolve(&s, &g, &sys, 0.75);
    assert!(h2_distance(&a, &b, &g) < 1e-13);
    assert_eq!(a.t, b.t);
}

#[test]
fn linear_integrate_matches_stepping() {
    let (g, _, s) = gaussian_1d();
    let sys = SystemParams::single(1.0, Kappa::One, 0.0).unwrap();
    let plan = StepPlan::new(1e-3, 400, 1, 100).unwrap();
    let mut seen = Vec::new();
    let end = integrate(&s, &g, &sys, &plan, |k, st| {
        seen.push((k, st.t));
        Ok(())
    })
    .unwrap();
    assert_eq!(seen.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 100, 200, 300, 400]);
    let mut stepped = s.clone();
    let mut stepper = q4nl::Stepper::new(&g, &sys);
    for _ in 0..400 {
        stepper.step(&mut stepped, 1e-3);
    }
    assert!(h2_distance(&end, &stepped, &g) < 1e-11);
    assert_relative_eq!(end.t, 0.4, epsilon = 1e-15);
}

#[test]
fn quadratic_groups_are_nonpositive_for_defocusing_states() {
    let g = Grid::from_parts(2, 64, 32.0).unwrap();
    let sys = SystemParams::single(2.0, Kappa::One, 1.0).unwrap();
    let ev = Morawetz::new(&g, &sys, &WeightSpec::quadratic()).unwrap();
    let p = InitialParams {
        width: 2.0,
        spectral_width: 1.0,
        ..Default::default()
    };
    for seed in 0..8 {
        let s = make_initial(InitialKind::RandomSchwartz, &p, &g, &sys, seed).unwrap();
        for (i, v) in ev.rhs(&s).iter().enumerate() {
            assert!(*v <= 1e-12, "seed {seed} group {i}: {v}");
        }
    }
}

#[test]
fn gn_ratio_is_bounded_over_rescalings() {
    let g = Grid::from_parts(2, 128, 64.0).unwrap();
    let sys = SystemParams::single(1.0, Kappa::One, 1.0).unwrap();
    let ratios: Vec<f64> = [0.8, 1.2, 1.8, 2.7, 4.0]
        .iter()
        .map(|&w| {
            let p = InitialParams {
                width: w,
                ..Default::default()
            };
            let s = make_initial(InitialKind::GaussianPacket, &p, &g, &sys, 0).unwrap();
            gn_localized_ratio(&s, &g, UNIT_CUBE).unwrap()
        })
        .collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(ratios.iter().all(|r| r.is_finite() && *r > 0.0));
    assert!(max < 10.0, "{ratios:?}");
}

#[test]
fn spacetime_norm_converges_under_finer_sampling() {
    let (g, sys, s) = gaussian_1d();
    let lin = sys.linearized();
    let traj = |dt: f64| -> Vec<FieldState> {
        (0..=(1.0 / dt).round() as usize)
            .map(|i| free_evolve(&s, &g, &lin, dt * i as f64))
            .collect()
    };
    let q = Exponent::int(16);
    let r = Exponent::int(4);
    let coarse = spacetime_norm(&traj(0.1), &g, q, r).unwrap();
    let fine = spacetime_norm(&traj(0.05), &g, q, r).unwrap();
    assert!((coarse - fine).abs() < 0.1 * fine, "{coarse} vs {fine}");
}

#[test]
fn plane_wave_free_flow_keeps_modulus() {
    let g = Grid::from_parts(1, 32, 2.0 * PI).unwrap();
    let sys = SystemParams::single(1.0, Kappa::Zero, 0.0).unwrap();
    let u: Vec<Complex64> = (0..32)
        .map(|i| Complex64::from_polar(0.7, 3.0 * g.position(i)[0]))
        .collect();
    let out = free_evolve(&FieldState::new(0.0, vec![u.clone()]), &g, &sys, 0.01);
    for (a, b) in out.components[0].iter().zip(u.iter()) {
        assert_relative_eq!(a.norm(), 0.7, max_relative = 1e-14);
        assert_relative_eq!((a / b).arg(), 0.81, epsilon = 1e-12);
    }
}
