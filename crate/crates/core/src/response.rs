//! Linearized probe response around the pump-dressed steady state.
//!
//! With the ansatz δa = a₊e^{−iΩt} + a₋e^{+iΩt} the linearized field and
//! oscillator equations reduce, for u = a₊ and v = a₋*, to
//!
//! ```text
//! A u = iΛ(u + v) + √(κ_e/2)        A = κ/2 + i(Δ − Ω)
//! B v = −iΛ(u + v)                  B = κ/2 − i(Δ + Ω)
//! Λ = 2 n_p Σ_k α_k ω_k η_k(Ω)
//! ```
//!
//! [`sideband_general`] solves this 2×2 system directly and is the
//! reference path. [`sideband_closed_form`] evaluates the equivalent
//! rational expression written in terms of the bare pump detuning and is
//! kept as an algebraic cross-check.
//!
//! All amplitudes are normalized to a unit probe amplitude E_pr = 1.
//! Transmission follows the side-coupled (hanger) input-output relation
//! t_p = 1 − √(κ_e/2)·a₊ and the reflected probe is the re-emitted part
//! r_p = 1 − t_p.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DeviceModel, DriveConfig};
use crate::steadystate::{steady_state, RootPolicy, SteadyState};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Magnitude below which a phase is considered undefined.
const PHASE_FLOOR: f64 = 1e-12;

/// Mechanical susceptibility ratio η = ω²/(ω² − iγδ − δ²).
pub fn eta(omega_m: f64, gamma: f64, delta: f64) -> Complex64 {
    let w2 = omega_m * omega_m;
    Complex64::new(w2, 0.0) / Complex64::new((omega_m - delta) * (omega_m + delta), -gamma * delta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCoefficients {
    /// Probe–pump detuning δ ≡ Ω (rad/s).
    pub delta: f64,
    pub alpha: Vec<f64>,
    pub eta: Vec<Complex64>,
    /// Λ = 2 n_p Σ α_k ω_k η_k.
    pub lambda: Complex64,
    /// β = Λ².
    pub beta: Complex64,
    /// θ = 2i n_p Σ α_k ω_k (η_k + 1).
    pub theta: Complex64,
}

pub fn coefficients(model: &DeviceModel, steady: &SteadyState, omega: f64) -> ResponseCoefficients {
    let alpha: Vec<f64> = model.modes.iter().map(|m| m.alpha()).collect();
    let eta: Vec<Complex64> = model
        .modes
        .iter()
        .map(|m| eta(m.omega(), m.gamma(), omega))
        .collect();
    let mut dynamic = Complex64::new(0.0, 0.0);
    let mut static_part = 0.0;
    for ((m, a), e) in model.modes.iter().zip(&alpha).zip(&eta) {
        dynamic += a * m.omega() * e;
        static_part += a * m.omega();
    }
    let lambda = 2.0 * steady.n_p * dynamic;
    let theta = 2.0 * I * steady.n_p * (dynamic + static_part);
    ResponseCoefficients {
        delta: omega,
        alpha,
        eta,
        lambda,
        beta: lambda * lambda,
        theta,
    }
}

fn check_finite(z: Complex64, omega: f64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::SingularResponse { omega })
    }
}

/// a₊ from the closed-form expression in terms of Δ_pu, θ and β.
pub fn sideband_closed_form(
    model: &DeviceModel,
    steady: &SteadyState,
    omega: f64,
) -> Result<Complex64> {
    let c = coefficients(model, steady, omega);
    let half_kappa = 0.5 * model.cavity.kappa();
    let drive = (0.5 * model.cavity.kappa_e()).sqrt();
    let d_pu = steady.pump_detuning;
    let front = Complex64::new(half_kappa, -omega);
    let numerator = front - I * d_pu + c.theta;
    let shifted = d_pu + I * c.theta;
    let denominator = front * front + shifted * shifted - c.beta;
    if denominator == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularResponse { omega });
    }
    check_finite(drive * numerator / denominator, omega)
}

/// Sideband amplitudes from the direct linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Sidebands {
    /// Probe-frequency amplitude a₊ (at ω_pu + Ω).
    pub a_plus: Complex64,
    /// Four-wave-mixing amplitude a₋ (at ω_pu − Ω).
    pub a_minus: Complex64,
    /// Mechanical amplitudes Q_{+,k}; Q_{−,k} is their conjugate.
    pub q_plus: Vec<Complex64>,
}

impl Sidebands {
    pub fn q_minus(&self) -> Vec<Complex64> {
        self.q_plus.iter().map(Complex64::conj).collect()
    }
}

pub fn sideband_general(
    model: &DeviceModel,
    steady: &SteadyState,
    omega: f64,
) -> Result<Sidebands> {
    let c = coefficients(model, steady, omega);
    let half_kappa = 0.5 * model.cavity.kappa();
    let drive = (0.5 * model.cavity.kappa_e()).sqrt();
    let delta = steady.delta_eff;
    let a = Complex64::new(half_kappa, delta - omega);
    let b = Complex64::new(half_kappa, -(delta + omega));
    let lambda = c.lambda;

    // [A − iΛ   −iΛ  ] [u]   [√(κ_e/2)]
    // [ iΛ     B + iΛ] [v] = [   0    ]
    let m11 = a - I * lambda;
    let m12 = -I * lambda;
    let m21 = I * lambda;
    let m22 = b + I * lambda;
    let det = m11 * m22 - m12 * m21;
    if det == Complex64::new(0.0, 0.0) {
        return Err(Error::SingularResponse { omega });
    }
    let u = check_finite(drive * m22 / det, omega)?;
    let v = check_finite(-drive * m21 / det, omega)?;

    let a_s = steady.a_s.re;
    let q_plus = model
        .modes
        .iter()
        .zip(&c.eta)
        .map(|(m, e)| 2.0 * m.g() * a_s / m.omega() * e * (u + v))
        .collect();
    Ok(Sidebands {
        a_plus: u,
        a_minus: v.conj(),
        q_plus,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponsePoint {
    /// Probe–pump detuning Ω (rad/s).
    pub omega: f64,
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub q_plus: Vec<Complex64>,
    pub t_p: Complex64,
    pub r_p: Complex64,
    pub phase_t: f64,
    pub phase_r: f64,
    pub tau_t: Option<f64>,
    pub tau_r: Option<f64>,
    /// |√(κ_e/2)·a₋| relative to the probe amplitude.
    pub fwm_mag: f64,
}

pub fn transmission(
    model: &DeviceModel,
    steady: &SteadyState,
    omega: f64,
) -> Result<ResponsePoint> {
    let sb = sideband_general(model, steady, omega)?;
    let coupling = (0.5 * model.cavity.kappa_e()).sqrt();
    let t_p = 1.0 - coupling * sb.a_plus;
    let r_p = 1.0 - t_p;
    Ok(ResponsePoint {
        omega,
        a_plus: sb.a_plus,
        a_minus: sb.a_minus,
        q_plus: sb.q_plus,
        t_p,
        r_p,
        phase_t: t_p.arg(),
        phase_r: r_p.arg(),
        tau_t: None,
        tau_r: None,
        fwm_mag: (coupling * sb.a_minus).norm(),
    })
}

/// Remove 2π jumps so consecutive samples differ by less than π.
pub fn unwrap_phase(phases: &mut [f64]) {
    for i in 1..phases.len() {
        let mut d = phases[i] - phases[i - 1];
        while d > PI {
            phases[i] -= 2.0 * PI;
            d -= 2.0 * PI;
        }
        while d < -PI {
            phases[i] += 2.0 * PI;
            d += 2.0 * PI;
        }
    }
}

/// Default finite-difference step: a hundredth of the narrowest bare
/// mechanical linewidth.
pub fn default_step(model: &DeviceModel) -> f64 {
    model.min_gamma() / 100.0
}

/// Group delays (τ_t, τ_r) = ∂arg/∂Ω of t_p and r_p by central difference.
pub fn group_delay_at(
    model: &DeviceModel,
    steady: &SteadyState,
    omega: f64,
    step: f64,
) -> Result<(f64, f64)> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "group delay step must be > 0, got {step}"
        )));
    }
    let mut phase_t = [0.0; 3];
    let mut phase_r = [0.0; 3];
    for (i, w) in [omega - step, omega, omega + step].into_iter().enumerate() {
        let p = transmission(model, steady, w)?;
        if p.t_p.norm() < PHASE_FLOOR || p.r_p.norm() < PHASE_FLOOR {
            return Err(Error::PhaseUndefined { omega: w });
        }
        phase_t[i] = p.phase_t;
        phase_r[i] = p.phase_r;
    }
    unwrap_phase(&mut phase_t);
    unwrap_phase(&mut phase_r);
    Ok((
        (phase_t[2] - phase_t[0]) / (2.0 * step),
        (phase_r[2] - phase_r[0]) / (2.0 * step),
    ))
}

fn point_with_delays(
    model: &DeviceModel,
    steady: &SteadyState,
    omega: f64,
    step: f64,
) -> Result<ResponsePoint> {
    let mut p = transmission(model, steady, omega)?;
    let (tau_t, tau_r) = group_delay_at(model, steady, omega, step)?;
    p.tau_t = Some(tau_t);
    p.tau_r = Some(tau_r);
    Ok(p)
}

/// Full response on a grid of probe detunings for an already solved
/// steady state.
pub fn spectrum_at(
    model: &DeviceModel,
    steady: &SteadyState,
    omega_grid: &[f64],
) -> Result<Vec<ResponsePoint>> {
    if omega_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "probe detuning grid must be strictly increasing".into(),
        ));
    }
    let step = default_step(model);
    omega_grid
        .par_iter()
        .map(|&w| point_with_delays(model, steady, w, step))
        .collect()
}

/// Full response on a grid, using the unique steady state.
pub fn spectrum(
    model: &DeviceModel,
    drive: &DriveConfig,
    omega_grid: &[f64],
) -> Result<Vec<ResponsePoint>> {
    let steady = steady_state(model, drive, RootPolicy::RequireUnique)?;
    spectrum_at(model, &steady, omega_grid)
}

/// C_k = 4 g_k² n_p / (κ γ_k).
pub fn cooperativity(model: &DeviceModel, steady: &SteadyState, k: usize) -> f64 {
    let m = &model.modes[k];
    4.0 * m.g() * m.g() * steady.n_p / (model.cavity.kappa() * m.gamma())
}

/// γ_eff,k = γ_k (1 + C_k).
pub fn effective_linewidth(model: &DeviceModel, steady: &SteadyState, k: usize) -> f64 {
    model.modes[k].gamma() * (1.0 + cooperativity(model, steady, k))
}

/// Width of a single window shared by several modes of equal frequency and
/// damping: γ (1 + Σ C_k). For two identical modes this is γ₁(1 + 2C₁).
pub fn combined_linewidth(
    model: &DeviceModel,
    steady: &SteadyState,
    modes: &[usize],
) -> Result<f64> {
    let Some(&first) = modes.first() else {
        return Err(Error::InvalidInput("no modes selected".into()));
    };
    let reference = &model.modes[first];
    if modes.iter().any(|&k| {
        model.modes[k].omega_hz != reference.omega_hz
            || model.modes[k].gamma_hz != reference.gamma_hz
    }) {
        return Err(Error::InvalidInput(
            "combined window width needs modes with equal frequency and damping".into(),
        ));
    }
    let total: f64 = modes.iter().map(|&k| cooperativity(model, steady, k)).sum();
    Ok(reference.gamma() * (1.0 + total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_device;
    use std::f64::consts::TAU;

    fn reference() -> (DeviceModel, DriveConfig, SteadyState) {
        let (model, drive) = reference_device();
        let s = steady_state(&model, &drive, RootPolicy::default()).unwrap();
        (model, drive, s)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn eta_identities() {
        for (w, g) in [(2e8, 5e3), (6e4, 60.0)] {
            assert_eq!(eta(w, g, 0.0), Complex64::new(1.0, 0.0));
            for d in [1.0, 0.3 * w, w, 1.7 * w] {
                let plus = eta(w, g, d);
                let minus = eta(w, g, -d);
                assert!((plus.conj() - minus).norm() <= 1e-15 * plus.norm());
            }
        }
    }

    #[test]
    fn beta_is_lambda_squared() {
        let (model, _, s) = reference();
        let c = coefficients(&model, &s, model.modes[0].omega());
        let direct = {
            let sum: Complex64 = model
                .modes
                .iter()
                .zip(&c.eta)
                .map(|(m, e)| m.alpha() * m.omega() * e)
                .sum();
            4.0 * s.n_p * s.n_p * sum * sum
        };
        assert!(rel(c.beta, direct) < 1e-12);
    }

    #[test]
    fn bare_cavity_resonance() {
        let (model, drive) = reference_device();
        let s = steady_state(&model, &drive.with_pump_power(0.0), RootPolicy::default()).unwrap();
        let omega = drive.pump_detuning();
        let hk = 0.5 * model.cavity.kappa();
        let coupling = (0.5 * model.cavity.kappa_e()).sqrt();
        let a = sideband_closed_form(&model, &s, omega).unwrap();
        assert!(rel(a, Complex64::new(coupling / hk, 0.0)) < 1e-14);

        let p = transmission(&model, &s, omega).unwrap();
        // |t_p| = 1 − κ_e/κ = 1 − 4.8/6.2
        assert!((p.t_p.norm() - (1.0 - 4.8 / 6.2)).abs() < 1e-12);
        assert!((p.t_p.norm() - 0.22581).abs() < 1e-5);
        assert_eq!(p.a_minus, Complex64::new(0.0, 0.0));
        assert_eq!(p.fwm_mag, 0.0);
    }

    #[test]
    fn decoupled_cavity_general_solve() {
        let (mut model, drive) = reference_device();
        for m in &mut model.modes {
            m.g_hz = 0.0;
        }
        let s = steady_state(&model, &drive, RootPolicy::default()).unwrap();
        let coupling = (0.5 * model.cavity.kappa_e()).sqrt();
        for omega in [0.0, 1e8, drive.pump_detuning(), 3e8] {
            let sb = sideband_general(&model, &s, omega).unwrap();
            let expect = coupling
                / Complex64::new(0.5 * model.cavity.kappa(), drive.pump_detuning() - omega);
            assert!(rel(sb.a_plus, expect) < 1e-14);
            assert_eq!(sb.a_minus, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn static_response_satisfies_linear_system() {
        let (model, _, s) = reference();
        let sb = sideband_general(&model, &s, 0.0).unwrap();
        let c = coefficients(&model, &s, 0.0);
        let hk = 0.5 * model.cavity.kappa();
        let coupling = (0.5 * model.cavity.kappa_e()).sqrt();
        let (u, v) = (sb.a_plus, sb.a_minus.conj());
        let a = Complex64::new(hk, s.delta_eff);
        let b = Complex64::new(hk, -s.delta_eff);
        let r1 = a * u - I * c.lambda * (u + v) - coupling;
        let r2 = b * v + I * c.lambda * (u + v);
        // residuals relative to the products being cancelled
        let scale = coupling.max((a * u).norm());
        assert!(r1.norm() <= 1e-12 * scale, "{r1}");
        assert!(r2.norm() <= 1e-12 * scale, "{r2}");
    }

    #[test]
    fn closed_form_matches_general_at_mechanical_resonances() {
        let (model, _, s) = reference();
        for m in &model.modes {
            let closed = sideband_closed_form(&model, &s, m.omega()).unwrap();
            let general = sideband_general(&model, &s, m.omega()).unwrap().a_plus;
            assert!(rel(closed, general) < 1e-10);
        }
    }

    #[test]
    fn mechanical_sidebands_are_conjugate() {
        let (model, _, s) = reference();
        let omega = model.modes[1].omega();
        let sb = sideband_general(&model, &s, omega).unwrap();
        // Q₋ from the e^{+iΩt} oscillator equation, independently of Q₊.
        for (k, m) in model.modes.iter().enumerate() {
            let q_minus = 2.0 * m.g() * s.a_s.re / m.omega()
                * eta(m.omega(), m.gamma(), -omega)
                * (sb.a_minus + sb.a_plus.conj());
            assert!((q_minus - sb.q_plus[k].conj()).norm() <= 1e-12 * q_minus.norm());
        }
        assert!(sb.a_minus.norm() > 0.0);
    }

    #[test]
    fn overdamped_limit_leaves_static_shift_only() {
        let (mut model, drive) = reference_device();
        let s = steady_state(&model, &drive, RootPolicy::default()).unwrap();
        for m in &mut model.modes {
            m.gamma_hz = 1e30;
        }
        let omega = 31e6 * TAU;
        let a = sideband_closed_form(&model, &s, omega).unwrap();
        let coupling = (0.5 * model.cavity.kappa_e()).sqrt();
        let expect = coupling / Complex64::new(0.5 * model.cavity.kappa(), s.delta_eff - omega);
        assert!(rel(a, expect) < 1e-9);
    }

    #[test]
    fn transmission_points() {
        let (model, drive, s) = reference();
        let far = transmission(
            &model,
            &s,
            drive.pump_detuning() + 1e3 * model.cavity.kappa(),
        )
        .unwrap();
        assert!((far.t_p.norm() - 1.0).abs() < 1e-3);
        let p = transmission(&model, &s, model.modes[0].omega()).unwrap();
        assert!((p.t_p + p.r_p - 1.0).norm() <= 2.0 * f64::EPSILON);
        assert_eq!(p.phase_t, p.t_p.arg());
        assert_eq!(p.phase_r, p.r_p.arg());
        assert!(p.fwm_mag > 0.0);
    }

    #[test]
    fn bare_cavity_group_delay() {
        let (model, drive) = reference_device();
        let s = steady_state(&model, &drive.with_pump_power(0.0), RootPolicy::default()).unwrap();
        let (k, ke) = (model.cavity.kappa(), model.cavity.kappa_e());
        let analytic = -2.0 * ke / (k * (k - ke));
        let (tau_t, _) =
            group_delay_at(&model, &s, drive.pump_detuning(), default_step(&model)).unwrap();
        assert!((tau_t - analytic).abs() < 1e-3 * analytic.abs());
        assert!((analytic + 0.176e-6).abs() < 1e-9);
    }

    #[test]
    fn group_delay_step_convergence_at_window_centers() {
        let (model, _, s) = reference();
        let h = default_step(&model);
        for m in &model.modes {
            let (t1, r1) = group_delay_at(&model, &s, m.omega(), h).unwrap();
            let (t2, r2) = group_delay_at(&model, &s, m.omega(), h / 2.0).unwrap();
            assert!(((t1 - t2) / t2).abs() < 1e-3);
            assert!(((r1 - r2) / r2).abs() < 1e-3);
        }
        assert!(group_delay_at(&model, &s, 0.0, 0.0).is_err());
    }

    #[test]
    fn phase_unwrapping() {
        let mut p = [3.0, -3.0, 3.1, -3.1];
        unwrap_phase(&mut p);
        for w in p.windows(2) {
            assert!((w[1] - w[0]).abs() < PI);
        }
        assert!((p[1] - (-3.0 + 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn spectrum_consistency() {
        let (model, drive, s) = reference();
        let w = model.modes[0].omega();
        let single = spectrum(&model, &drive, &[w]).unwrap();
        let direct = transmission(&model, &s, w).unwrap();
        assert_eq!(single[0].t_p, direct.t_p);
        assert!(single[0].tau_t.is_some());
        assert!(spectrum(&model, &drive, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn cooperativity_values() {
        let (model, drive, s) = reference();
        let z = steady_state(&model, &drive.with_pump_power(0.0), RootPolicy::default()).unwrap();
        assert_eq!(cooperativity(&model, &z, 0), 0.0);
        assert_eq!(effective_linewidth(&model, &z, 0), model.modes[0].gamma());
        // n_p = 1.578e8 from bisection: C₁ = 4·(2π·39)²·n_p/(2π·6.2e6 · 2π·930) ≈ 166.5
        let c1 = cooperativity(&model, &s, 0);
        assert!((c1 / 166.5 - 1.0).abs() < 1e-3, "{c1}");
        assert!(combined_linewidth(&model, &s, &[0, 1]).is_err());
    }
}
