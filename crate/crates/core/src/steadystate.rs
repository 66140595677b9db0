//! Pump-only classical steady state.
//!
//! The intracavity photon number solves
//!
//! ```text
//! n [ (κ/2)² + (Δ_pu − S n)² ] = (κ_e/2) E_pu²,   S = Σ_k 2 g_k² / ω_k
//! ```
//!
//! which is a cubic in n with up to three nonnegative real roots. The cubic
//! is solved in closed form in the normalized variable w = S n / (κ/2) and
//! each root is then Newton-polished against the unnormalized residual.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{pump_amplitude, DeviceModel, DriveConfig};

/// Roots closer than this fraction of the largest root are merged.
const ROOT_MERGE_TOL: f64 = 1e-8;
/// Residual bound, relative to max(1, (κ_e/2) E_pu²).
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Eigenvalue real parts must stay below this fraction of κ.
const STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Unique,
    Lower,
    Middle,
    Upper,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Unique => "unique",
            Branch::Lower => "lower",
            Branch::Middle => "middle",
            Branch::Upper => "upper",
        }
    }
}

/// Which root to use when the cubic has three.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootPolicy {
    #[default]
    RequireUnique,
    Lowest,
    Highest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Intracavity pump photon number |a_s|².
    pub n_p: f64,
    /// Re-phased cavity amplitude: real and nonnegative, √n_p.
    pub a_s: Complex64,
    /// Phase removed from the lab-frame amplitude √(κ_e/2)E_pu/(κ/2 + iΔ).
    pub phase: f64,
    /// Static dimensionless displacements Q_{s,k} = 2 g_k n_p / ω_k.
    pub q_s: Vec<f64>,
    /// Effective detuning Δ = Δ_pu − Σ g_k Q_{s,k} (rad/s).
    pub delta_eff: f64,
    /// Bare pump detuning Δ_pu (rad/s).
    pub pump_detuning: f64,
    /// Pump amplitude E_pu (√(photons/s)).
    pub e_pu: f64,
    pub branch: Branch,
    pub stable: bool,
}

impl SteadyState {
    /// Cavity amplitude in the pump rotating frame, before re-phasing.
    pub fn a_s_lab(&self) -> Complex64 {
        self.a_s * Complex64::from_polar(1.0, self.phase)
    }
}

/// Residual of the photon-number cubic at `n`.
pub fn photon_number_residual(model: &DeviceModel, drive: &DriveConfig, e_pu: f64, n: f64) -> f64 {
    let half_kappa = 0.5 * model.cavity.kappa();
    let rhs = 0.5 * model.cavity.kappa_e() * e_pu * e_pu;
    let detuning = drive.pump_detuning() - model.shift_per_photon() * n;
    n * (half_kappa * half_kappa + detuning * detuning) - rhs
}

/// Real roots of x³ + b x² + c x + d, ascending.
pub fn real_cubic_roots(b: f64, c: f64, d: f64) -> Vec<f64> {
    let shift = b / 3.0;
    let p = c - b * shift;
    let q = 2.0 * shift * shift * shift - c * shift + d;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;

    let mut roots = if disc > 0.0 {
        let s = disc.sqrt();
        // Pick the cube root that avoids cancellation.
        let big = -(half_q.signum()) * (half_q.abs() + s).cbrt();
        let small = if big != 0.0 { -third_p / big } else { 0.0 };
        vec![big + small - shift]
    } else if p == 0.0 {
        vec![-shift]
    } else {
        let r = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect()
    };

    for x in roots.iter_mut() {
        *x = newton_polish(*x, |x| {
            let f = ((x + b) * x + c) * x + d;
            let df = (3.0 * x + 2.0 * b) * x + c;
            (f, df)
        });
    }
    roots.sort_by(f64::total_cmp);
    roots
}

fn newton_polish(mut x: f64, f: impl Fn(f64) -> (f64, f64)) -> f64 {
    let (mut fx, _) = f(x);
    for _ in 0..50 {
        let (_, dfx) = f(x);
        if dfx == 0.0 || !dfx.is_finite() {
            break;
        }
        let next = x - fx / dfx;
        let (fnext, _) = f(next);
        if !(fnext.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = fnext;
        if fx == 0.0 {
            break;
        }
    }
    x
}

fn photon_number_roots(model: &DeviceModel, drive: &DriveConfig, e_pu: f64) -> Vec<f64> {
    let half_kappa = 0.5 * model.cavity.kappa();
    let rhs = 0.5 * model.cavity.kappa_e() * e_pu * e_pu;
    let detuning = drive.pump_detuning();
    let s = model.shift_per_photon();

    if rhs == 0.0 {
        return vec![0.0];
    }
    if s == 0.0 {
        return vec![rhs / (half_kappa * half_kappa + detuning * detuning)];
    }

    // w [1 + (d − w)²] = ρ  with  w = S n/(κ/2), d = Δ_pu/(κ/2).
    let d = detuning / half_kappa;
    let rho = rhs * s / (half_kappa * half_kappa * half_kappa);
    let mut roots: Vec<f64> = real_cubic_roots(-2.0 * d, 1.0 + d * d, -rho)
        .into_iter()
        .map(|w| w * half_kappa / s)
        .map(|n| {
            newton_polish(n, |n| {
                let delta = detuning - s * n;
                let f = n * (half_kappa * half_kappa + delta * delta) - rhs;
                let df = half_kappa * half_kappa + delta * delta - 2.0 * s * n * delta;
                (f, df)
            })
        })
        .filter(|n| *n >= 0.0)
        .collect();
    roots.sort_by(f64::total_cmp);

    let largest = roots.iter().cloned().fold(0.0, f64::max);
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    for n in roots {
        match merged.last() {
            Some(&prev) if (n - prev).abs() < ROOT_MERGE_TOL * largest => {}
            _ => merged.push(n),
        }
    }
    merged
}

fn build_state(
    model: &DeviceModel,
    drive: &DriveConfig,
    e_pu: f64,
    n_p: f64,
    branch: Branch,
) -> SteadyState {
    let q_s: Vec<f64> = model
        .modes
        .iter()
        .map(|m| 2.0 * m.g() * n_p / m.omega())
        .collect();
    let pull: f64 = model.modes.iter().zip(&q_s).map(|(m, q)| m.g() * q).sum();
    let pump_detuning = drive.pump_detuning();
    let delta_eff = pump_detuning - pull;
    // arg of √(κ_e/2)E_pu/(κ/2 + iΔ) with E_pu real and positive.
    let phase = if n_p > 0.0 {
        -delta_eff.atan2(0.5 * model.cavity.kappa())
    } else {
        0.0
    };
    let mut state = SteadyState {
        n_p,
        a_s: Complex64::new(n_p.sqrt(), 0.0),
        phase,
        q_s,
        delta_eff,
        pump_detuning,
        e_pu,
        branch,
        stable: false,
    };
    state.stable = classify_stability(model, &state);
    state
}

/// All nonnegative steady states, ascending in photon number.
pub fn solve_photon_number(model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<SteadyState>> {
    let e_pu = pump_amplitude(drive, &model.cavity)?;
    let roots = photon_number_roots(model, drive, e_pu);
    let branches: &[Branch] = match roots.len() {
        1 => &[Branch::Unique],
        2 => &[Branch::Lower, Branch::Upper],
        _ => &[Branch::Lower, Branch::Middle, Branch::Upper],
    };
    Ok(roots
        .iter()
        .zip(branches)
        .map(|(&n, &branch)| build_state(model, drive, e_pu, n, branch))
        .collect())
}

/// The steady state selected by `policy`.
pub fn steady_state(
    model: &DeviceModel,
    drive: &DriveConfig,
    policy: RootPolicy,
) -> Result<SteadyState> {
    let mut states = solve_photon_number(model, drive)?;
    if states.len() > 1 && policy == RootPolicy::RequireUnique {
        return Err(Error::Bistable {
            roots: states.len(),
        });
    }
    Ok(match policy {
        RootPolicy::Highest => states.pop().expect("at least one root"),
        _ => states.swap_remove(0),
    })
}

/// Real drift matrix of the linearized pump-only dynamics.
///
/// State ordering: Re δa, Im δa, then (Q_k, Q̇_k/ω_k) per mode. The velocity
/// is scaled by 1/ω_k so every entry is of order ω_k or smaller; the
/// eigenvalues are unaffected.
pub fn drift_matrix(model: &DeviceModel, state: &SteadyState) -> DMatrix<f64> {
    let n = 2 + 2 * model.n_modes();
    let half_kappa = 0.5 * model.cavity.kappa();
    let delta = state.delta_eff;
    let a_s = state.a_s.re;
    let mut m = DMatrix::zeros(n, n);
    m[(0, 0)] = -half_kappa;
    m[(0, 1)] = delta;
    m[(1, 0)] = -delta;
    m[(1, 1)] = -half_kappa;
    for (k, mode) in model.modes.iter().enumerate() {
        let q = 2 + 2 * k;
        let p = q + 1;
        let (omega, gamma, g) = (mode.omega(), mode.gamma(), mode.g());
        m[(1, q)] = a_s * g;
        m[(q, p)] = omega;
        m[(p, q)] = -omega;
        m[(p, p)] = -gamma;
        m[(p, 0)] = 4.0 * g * a_s;
    }
    m
}

pub fn drift_eigenvalues(model: &DeviceModel, state: &SteadyState) -> Vec<Complex64> {
    drift_matrix(model, state)
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

/// True when every drift eigenvalue has a negative real part.
pub fn classify_stability(model: &DeviceModel, candidate: &SteadyState) -> bool {
    let limit = STABILITY_TOL * model.cavity.kappa();
    drift_eigenvalues(model, candidate)
        .iter()
        .all(|z| z.re < limit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_device, MechanicalMode};

    fn bisect(model: &DeviceModel, drive: &DriveConfig) -> f64 {
        let e = pump_amplitude(drive, &model.cavity).unwrap();
        let f = |n| photon_number_residual(model, drive, e, n);
        let (mut lo, mut hi) = (0.0_f64, 1e12_f64);
        assert!(f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn cubic_roots_known_polynomials() {
        // (x − 1)(x − 2)(x − 3)
        let r = real_cubic_roots(-6.0, 11.0, -6.0);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        // x³ + x + 1 has one real root near −0.6823278
        let r = real_cubic_roots(0.0, 1.0, 1.0);
        assert_eq!(r.len(), 1);
        assert!((r[0] + 0.682_327_803_828_019_3).abs() < 1e-14);
        // x³
        assert_eq!(real_cubic_roots(0.0, 0.0, 0.0), vec![0.0]);
    }

    #[test]
    fn undriven_cavity_has_zero_photons() {
        let (model, drive) = reference_device();
        let s = steady_state(&model, &drive.with_pump_power(0.0), RootPolicy::default()).unwrap();
        assert_eq!(s.n_p, 0.0);
        assert_eq!(s.a_s, Complex64::new(0.0, 0.0));
        assert!(s.q_s.iter().all(|&q| q == 0.0));
        assert_eq!(s.delta_eff, drive.pump_detuning());
        assert!(s.stable);
        assert_eq!(s.branch, Branch::Unique);
    }

    #[test]
    fn uncoupled_cavity_is_lorentzian() {
        let (mut model, drive) = reference_device();
        for m in &mut model.modes {
            m.g_hz = 0.0;
        }
        let states = solve_photon_number(&model, &drive).unwrap();
        assert_eq!(states.len(), 1);
        let e = pump_amplitude(&drive, &model.cavity).unwrap();
        let hk = 0.5 * model.cavity.kappa();
        let d = drive.pump_detuning();
        let expect = 0.5 * model.cavity.kappa_e() * e * e / (hk * hk + d * d);
        assert!((states[0].n_p - expect).abs() <= 1e-14 * expect);

        // resonant pump: a_s = √(κ_e/2)E/(κ/2) and needs no re-phasing
        let resonant = DriveConfig::new(1e-6, 0.0);
        let s = steady_state(&model, &resonant, RootPolicy::default()).unwrap();
        let e = pump_amplitude(&resonant, &model.cavity).unwrap();
        let expect = (0.5 * model.cavity.kappa_e()).sqrt() * e / hk;
        assert!((s.a_s.re - expect).abs() <= 1e-12 * expect);
        assert_eq!(s.phase, 0.0);
    }

    #[test]
    fn reference_device_matches_bisection() {
        let (model, drive) = reference_device();
        let states = solve_photon_number(&model, &drive).unwrap();
        assert_eq!(states.len(), 1);
        let s = &states[0];
        let oracle = bisect(&model, &drive);
        assert!((s.n_p - oracle).abs() <= 1e-10 * oracle);
        // bisection gives 1.578e8 photons
        assert!((s.n_p / 1.578e8 - 1.0).abs() < 1e-3, "{}", s.n_p);

        // static pull S·n_p ≈ 2π·33.75 kHz, small against Δ_pu = 2π·32.3 MHz
        let pull = drive.pump_detuning() - s.delta_eff;
        let expect = model.shift_per_photon() * oracle;
        assert!((pull - expect).abs() <= 1e-9 * expect);
        assert!((pull / std::f64::consts::TAU / 33.75e3 - 1.0).abs() < 1e-3);
        assert!(s.stable);

        assert!((s.a_s.norm_sqr() - s.n_p).abs() <= 1e-12 * s.n_p);
        for (m, q) in model.modes.iter().zip(&s.q_s) {
            let expect = 2.0 * m.g() * s.n_p / m.omega();
            assert!((q - expect).abs() <= 1e-12 * expect);
        }
        // the lab-frame amplitude satisfies the steady-state field equation
        let lab = s.a_s_lab();
        let e = pump_amplitude(&drive, &model.cavity).unwrap();
        let direct = (0.5 * model.cavity.kappa_e()).sqrt() * e
            / Complex64::new(0.5 * model.cavity.kappa(), s.delta_eff);
        assert!((lab - direct).norm() <= 1e-9 * direct.norm());
    }

    /// Single scaled mode pumped far above resonance with a power chosen
    /// halfway between the two turning points of the cubic.
    pub(crate) fn bistable_setup() -> (DeviceModel, DriveConfig) {
        crate::model::bistable_device()
    }

    #[test]
    fn bistable_branches() {
        let (model, drive) = bistable_setup();
        let states = solve_photon_number(&model, &drive).unwrap();
        assert_eq!(states.len(), 3);
        let e = pump_amplitude(&drive, &model.cavity).unwrap();
        let rhs = 0.5 * model.cavity.kappa_e() * e * e;
        for s in &states {
            let r = photon_number_residual(&model, &drive, e, s.n_p);
            assert!(r.abs() <= RESIDUAL_TOL * rhs.max(1.0));
        }
        assert_eq!(
            states.iter().map(|s| s.branch).collect::<Vec<_>>(),
            vec![Branch::Lower, Branch::Middle, Branch::Upper]
        );
        assert!(!states[1].stable);
        assert!(states[0].stable);

        assert_eq!(
            steady_state(&model, &drive, RootPolicy::RequireUnique),
            Err(Error::Bistable { roots: 3 })
        );
        let lo = steady_state(&model, &drive, RootPolicy::Lowest).unwrap();
        let hi = steady_state(&model, &drive, RootPolicy::Highest).unwrap();
        assert_eq!(lo.n_p, states[0].n_p);
        assert_eq!(hi.n_p, states[2].n_p);
    }

    #[test]
    fn passive_system_is_stable() {
        let (model, drive) = reference_device();
        let s = steady_state(&model, &drive.with_pump_power(0.0), RootPolicy::default()).unwrap();
        let mut eig = drift_eigenvalues(&model, &s);
        eig.sort_by(|a, b| a.re.total_cmp(&b.re));
        // two cavity eigenvalues at −κ/2, four mechanical at −γ/2 ± i√(ω² − γ²/4)
        let hk = 0.5 * model.cavity.kappa();
        assert!((eig[0].re + hk).abs() < 1e-6 * hk);
        assert!((eig[1].re + hk).abs() < 1e-6 * hk);
        for z in &eig[2..] {
            assert!((z.re + 0.5 * model.modes[0].gamma()).abs() < 1e-3);
        }
    }

    #[test]
    fn extra_mode_with_zero_coupling_changes_nothing() {
        let (mut model, drive) = reference_device();
        let base = steady_state(&model, &drive, RootPolicy::default()).unwrap();
        model
            .modes
            .push(MechanicalMode::new("spectator", 40e6, 100.0, 0.0));
        let extended = steady_state(&model, &drive, RootPolicy::default()).unwrap();
        assert_eq!(base.n_p, extended.n_p);
        assert_eq!(extended.q_s[2], 0.0);
    }
}
