use std::f64::consts::TAU;

use emit_lab::model::pump_amplitude;
use emit_lab::model::{
    parse_config, reference_device, scaled_test_device, to_config_string, DeviceModel, DriveConfig,
    MechanicalMode,
};
use emit_lab::response::{eta, transmission};
use emit_lab::steadystate::{
    photon_number_residual, solve_photon_number, steady_state, RootPolicy, RESIDUAL_TOL,
};
use proptest::prelude::*;

fn t_p(model: &DeviceModel, drive: &DriveConfig, omega: f64) -> num_complex::Complex64 {
    let s = steady_state(model, drive, RootPolicy::RequireUnique).unwrap();
    transmission(model, &s, omega).unwrap().t_p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coupling_sign_does_not_matter(
        power in 0.0..2e-6f64,
        detuning in 31e6..34e6f64,
        offset in -1e6..1.4e6f64,
        flip in 1usize..4,
    ) {
        let (model, drive) = reference_device();
        let drive = DriveConfig { pump_power_w: power, pump_detuning_hz: detuning, ..drive };
        let mut flipped = model.clone();
        for (k, m) in flipped.modes.iter_mut().enumerate() {
            if flip & (1 << k) != 0 {
                m.g_hz = -m.g_hz;
            }
        }
        let omega = model.modes[0].omega() + TAU * offset;
        let (a, b) = (t_p(&model, &drive, omega), t_p(&flipped, &drive, omega));
        prop_assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn mode_order_does_not_matter(
        power in 0.0..2e-6f64,
        detuning in 31e6..34e6f64,
        offset in -1e6..1.4e6f64,
    ) {
        let (model, drive) = reference_device();
        let drive = DriveConfig { pump_power_w: power, pump_detuning_hz: detuning, ..drive };
        let mut reversed = model.clone();
        reversed.modes.reverse();
        let omega = model.modes[0].omega() + TAU * offset;
        let (a, b) = (t_p(&model, &drive, omega), t_p(&reversed, &drive, omega));
        prop_assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn susceptibility_is_conjugate_symmetric(
        omega in 1.0..1e9f64,
        gamma in 1e-3..1e6f64,
        ratio in -3.0..3.0f64,
    ) {
        let delta = ratio * omega;
        prop_assert_eq!(eta(omega, gamma, 0.0), num_complex::Complex64::new(1.0, 0.0));
        prop_assert_eq!(eta(omega, gamma, -delta), eta(omega, gamma, delta).conj());
    }

    #[test]
    fn config_round_trip_is_exact(
        c in 1e9..1e10f64,
        kappa in 1e3..1e7f64,
        share in 0.01..0.99f64,
        modes in prop::collection::vec((1e3..1e8f64, 1e-2..1e4f64, -1e3..1e3f64), 1..5),
        power in 0.0..1e-3f64,
        detuning in -1e8..1e8f64,
    ) {
        let (mut model, _) = reference_device();
        model.cavity.omega_c_hz = c;
        model.cavity.kappa_hz = kappa;
        model.cavity.kappa_e_hz = kappa * share;
        model.modes = modes
            .iter()
            .enumerate()
            .map(|(i, &(w, g, coupling))| MechanicalMode::new(format!("m{i}"), w, g, coupling))
            .collect();
        let drive = DriveConfig::new(power, detuning);
        let (m2, d2) = parse_config(&to_config_string(&model, &drive)).unwrap();
        prop_assert_eq!(m2, model);
        prop_assert_eq!(d2, drive);
    }

    #[test]
    fn every_root_solves_the_cubic(
        power in 0.0..2e-11f64,
        detuning in -5e3..8e3f64,
    ) {
        let (model, drive) = scaled_test_device();
        let drive = DriveConfig { pump_power_w: power, pump_detuning_hz: detuning, ..drive };
        let roots = solve_photon_number(&model, &drive).unwrap();
        prop_assert!((1..=3).contains(&roots.len()));
        let e = pump_amplitude(&drive, &model.cavity).unwrap();
        let scale = (0.5 * model.cavity.kappa_e() * e * e).max(1.0);
        for pair in roots.windows(2) {
            prop_assert!(pair[1].n_p > pair[0].n_p);
        }
        for r in &roots {
            prop_assert!(photon_number_residual(&model, &drive, e, r.n_p).abs() <= RESIDUAL_TOL * scale);
        }
        // three roots require a detuning beyond √3·κ/2
        if roots.len() == 3 {
            prop_assert!(detuning > 3f64.sqrt() * 0.5 * model.cavity.kappa_hz);
        }
    }

    #[test]
    fn photon_number_grows_with_power(
        p1 in 0.0..2e-6f64,
        p2 in 0.0..2e-6f64,
        detuning in -33e6..33e6f64,
    ) {
        let (model, drive) = reference_device();
        let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
        prop_assume!(hi > lo);
        let at = |p| steady_state(&model, &DriveConfig { pump_power_w: p, pump_detuning_hz: detuning, ..drive.clone() }, RootPolicy::RequireUnique).unwrap().n_p;
        prop_assert!(at(hi) > at(lo));
    }
}
