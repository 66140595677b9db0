//! Nonlinear mean-field dynamics in the pump rotating frame.
//!
//! ```text
//! ȧ   = −[i(Δ_pu − Σ_k g_k Q_k) + κ/2] a + √(κ_e/2)(E_pu + E_pr e^{−iΩt})
//! Q̈_k = −γ_k Q̇_k − ω_k² Q_k + 2 g_k ω_k |a|²
//! ```
//!
//! Noise terms are absent. Integration is classic fixed-step RK4, started
//! from the pump-only steady state, so the recorded trace only contains the
//! response to the probe once the switch-on transient has decayed. The
//! sideband projection in [`extract_sideband`] is compared against the
//! linearized solve in [`crosscheck`].

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{probe_amplitude, pump_amplitude, DeviceModel, DriveConfig};
use crate::response::{effective_linewidth, sideband_general};
use crate::steadystate::{drift_eigenvalues, steady_state, RootPolicy, SteadyState};

/// Beat periods kept at the end of each run.
pub const RECORD_PERIODS: usize = 8;
/// Minimum samples per beat period in the recorded window.
pub const MIN_SAMPLES_PER_PERIOD: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeDomainTrace {
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Cavity field in the pump rotating frame.
    pub a_samples: Vec<Complex64>,
    /// Q_k(t), one series per mode.
    pub q_samples: Vec<Vec<f64>>,
    /// dQ_k/dt, one series per mode.
    pub v_samples: Vec<Vec<f64>>,
    pub omega_beat: f64,
    pub e_pu: f64,
    pub e_pr: f64,
}

impl TimeDomainTrace {
    pub fn len(&self) -> usize {
        self.a_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    /// Write `t_s, re_a, im_a, q_1..q_N` as CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "t_s,re_a,im_a")?;
        for k in 1..=self.q_samples.len() {
            write!(out, ",q_{k}")?;
        }
        writeln!(out)?;
        for (i, a) in self.a_samples.iter().enumerate() {
            write!(out, "{:.16e},{:.16e},{:.16e}", self.time(i), a.re, a.im)?;
            for q in &self.q_samples {
                write!(out, ",{:.16e}", q[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Initial condition: cavity amplitude plus (Q_k, Q̇_k) per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub a: Complex64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl InitialState {
    /// The pump-only fixed point, in the lab phase convention.
    pub fn at_rest(steady: &SteadyState) -> Self {
        Self {
            a: steady.a_s_lab(),
            q: steady.q_s.clone(),
            v: vec![0.0; steady.q_s.len()],
        }
    }
}

struct Rhs {
    half_kappa: f64,
    pump_detuning: f64,
    drive_pu: f64,
    drive_pr: f64,
    omega: f64,
    // per mode: (g, ω, γ)
    modes: Vec<(f64, f64, f64)>,
}

impl Rhs {
    // y = [Re a, Im a, Q_1, V_1, ...]
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let a = Complex64::new(y[0], y[1]);
        let mut detuning = self.pump_detuning;
        for (k, &(g, _, _)) in self.modes.iter().enumerate() {
            detuning -= g * y[2 + 2 * k];
        }
        let (s, c) = (-self.omega * t).sin_cos();
        let drive = Complex64::new(self.drive_pu + self.drive_pr * c, self.drive_pr * s);
        let da = -Complex64::new(self.half_kappa, detuning) * a + drive;
        dy[0] = da.re;
        dy[1] = da.im;
        let photons = a.norm_sqr();
        for (k, &(g, w, gamma)) in self.modes.iter().enumerate() {
            let q = y[2 + 2 * k];
            let v = y[3 + 2 * k];
            dy[2 + 2 * k] = v;
            dy[3 + 2 * k] = -gamma * v - w * w * q + 2.0 * g * w * photons;
        }
    }
}

/// Fixed-step integrator with explicit pump and probe amplitudes.
pub struct Integrator<'a> {
    pub model: &'a DeviceModel,
    pub pump_detuning: f64,
    pub e_pu: f64,
    pub e_pr: f64,
    pub omega: f64,
}

impl<'a> Integrator<'a> {
    pub fn from_drive(model: &'a DeviceModel, drive: &DriveConfig, omega: f64) -> Result<Self> {
        Ok(Self {
            model,
            pump_detuning: drive.pump_detuning(),
            e_pu: pump_amplitude(drive, &model.cavity)?,
            e_pr: probe_amplitude(drive, &model.cavity, omega)?,
            omega,
        })
    }

    /// Integrate for `horizon` seconds and keep the last
    /// [`RECORD_PERIODS`] beat periods.
    pub fn run(&self, initial: &InitialState, horizon: f64, dt: f64) -> Result<TimeDomainTrace> {
        let n_modes = self.model.n_modes();
        if initial.q.len() != n_modes || initial.v.len() != n_modes {
            return Err(Error::InvalidInput(
                "initial state has the wrong number of modes".into(),
            ));
        }
        if !(self.omega > 0.0) {
            return Err(Error::InvalidInput("beat frequency must be > 0".into()));
        }
        let fastest = self.model.max_omega().max(self.omega);
        if !(dt > 0.0) || dt > TAU / (40.0 * fastest) {
            return Err(Error::InvalidInput(format!(
                "time step {dt} s exceeds 2π/(40·{fastest}) s"
            )));
        }
        let period = TAU / self.omega;
        if period < MIN_SAMPLES_PER_PERIOD as f64 * dt * (1.0 - 1e-12) {
            return Err(Error::InvalidInput(format!(
                "fewer than {MIN_SAMPLES_PER_PERIOD} samples per beat period"
            )));
        }
        let steps = (horizon / dt).round() as usize;
        let record_steps = (RECORD_PERIODS as f64 * period / dt).round() as usize;
        if record_steps > steps {
            return Err(Error::InvalidInput(format!(
                "horizon {horizon} s shorter than {RECORD_PERIODS} beat periods"
            )));
        }

        let cav = &self.model.cavity;
        let rhs = Rhs {
            half_kappa: 0.5 * cav.kappa(),
            pump_detuning: self.pump_detuning,
            drive_pu: (0.5 * cav.kappa_e()).sqrt() * self.e_pu,
            drive_pr: (0.5 * cav.kappa_e()).sqrt() * self.e_pr,
            omega: self.omega,
            modes: self
                .model
                .modes
                .iter()
                .map(|m| (m.g(), m.omega(), m.gamma()))
                .collect(),
        };

        let dim = 2 + 2 * n_modes;
        let mut y = vec![0.0; dim];
        y[0] = initial.a.re;
        y[1] = initial.a.im;
        for k in 0..n_modes {
            y[2 + 2 * k] = initial.q[k];
            y[3 + 2 * k] = initial.v[k];
        }
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
            vec![0.0; dim],
            vec![0.0; dim],
            vec![0.0; dim],
            vec![0.0; dim],
            vec![0.0; dim],
        );

        let first_recorded = steps - record_steps;
        let len = record_steps + 1;
        let mut a_samples = Vec::with_capacity(len);
        let mut q_samples = vec![Vec::with_capacity(len); n_modes];
        let mut v_samples = vec![Vec::with_capacity(len); n_modes];
        let mut record = |y: &[f64]| {
            a_samples.push(Complex64::new(y[0], y[1]));
            for k in 0..n_modes {
                q_samples[k].push(y[2 + 2 * k]);
                v_samples[k].push(y[3 + 2 * k]);
            }
        };
        if first_recorded == 0 {
            record(&y);
        }

        for step in 0..steps {
            let t = step as f64 * dt;
            rhs.eval(t, &y, &mut k1);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * dt * k1[i];
            }
            rhs.eval(t + 0.5 * dt, &tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + 0.5 * dt * k2[i];
            }
            rhs.eval(t + 0.5 * dt, &tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + dt * k3[i];
            }
            rhs.eval(t + dt, &tmp, &mut k4);
            for i in 0..dim {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if !y.iter().all(|v| v.is_finite() && v.abs() < 1e150) {
                return Err(Error::Diverged { step: step + 1 });
            }
            if step + 1 >= first_recorded {
                record(&y);
            }
        }

        Ok(TimeDomainTrace {
            dt,
            t_start: first_recorded as f64 * dt,
            t_end: steps as f64 * dt,
            a_samples,
            q_samples,
            v_samples,
            omega_beat: self.omega,
            e_pu: self.e_pu,
            e_pr: self.e_pr,
        })
    }
}

/// Integrate with both drives from the pump-only steady state.
pub fn integrate(
    model: &DeviceModel,
    drive: &DriveConfig,
    omega: f64,
    horizon: f64,
    dt: f64,
) -> Result<TimeDomainTrace> {
    let steady = steady_state(model, drive, RootPolicy::RequireUnique)?;
    Integrator::from_drive(model, drive, omega)?.run(&InitialState::at_rest(&steady), horizon, dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandEstimate {
    pub a_plus_td: Complex64,
    pub a_minus_td: Complex64,
    /// Fraction of the fluctuation power outside the two sidebands.
    pub residual_harmonics: f64,
}

/// Project a − a_s onto e^{∓iΩt} over the recorded window.
pub fn extract_sideband(trace: &TimeDomainTrace, steady: &SteadyState) -> Result<SidebandEstimate> {
    if trace.len() < 2 {
        return Err(Error::NonIntegerWindow { periods: 0.0 });
    }
    let window = (trace.len() - 1) as f64 * trace.dt;
    let periods = window * trace.omega_beat / TAU;
    let whole = periods.round();
    if whole < 4.0 || (periods - whole).abs() > 1e-6 * periods {
        return Err(Error::NonIntegerWindow { periods });
    }
    let a_s = steady.a_s_lab();
    let last = trace.len() - 1;
    let mut plus = Complex64::new(0.0, 0.0);
    let mut minus = Complex64::new(0.0, 0.0);
    let mut power = 0.0;
    for (i, a) in trace.a_samples.iter().enumerate() {
        let weight = if i == 0 || i == last { 0.5 } else { 1.0 };
        let d = a - a_s;
        let rot = Complex64::from_polar(1.0, trace.omega_beat * trace.time(i));
        plus += weight * d * rot;
        minus += weight * d * rot.conj();
        power += weight * d.norm_sqr();
    }
    let scale = trace.dt / window;
    let (plus, minus, power) = (plus * scale, minus * scale, power * scale);
    let residual_harmonics = if power > 0.0 {
        (1.0 - (plus.norm_sqr() + minus.norm_sqr()) / power).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(SidebandEstimate {
        a_plus_td: plus,
        a_minus_td: minus,
        residual_harmonics,
    })
}

/// Step and horizon for a run at beat frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub horizon: f64,
}

impl TimeGrid {
    /// The step divides the beat period evenly with at least
    /// `samples_per_period` steps and resolves every mechanical frequency.
    /// The horizon lets the slowest linearized mode decay by e^{−18} and is
    /// never shorter than ten effective mechanical lifetimes.
    pub fn for_beat(
        model: &DeviceModel,
        steady: &SteadyState,
        omega: f64,
        samples_per_period: usize,
    ) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidInput("beat frequency must be > 0".into()));
        }
        let period = TAU / omega;
        let fastest = model.max_omega().max(omega);
        let per_period = (samples_per_period.max(MIN_SAMPLES_PER_PERIOD) as f64)
            .max((40.0 * fastest / omega).ceil()) as usize;
        let dt = period / per_period as f64;

        let slowest = drift_eigenvalues(model, steady)
            .iter()
            .map(|z| -z.re)
            .fold(f64::INFINITY, f64::min);
        if !(slowest > 0.0) {
            return Err(Error::InvalidInput(
                "steady state is not asymptotically stable".into(),
            ));
        }
        let narrowest = (0..model.n_modes())
            .map(|k| effective_linewidth(model, steady, k))
            .fold(f64::INFINITY, f64::min);
        let settle = (18.0 / slowest).max(10.0 / narrowest);
        let settle_periods = (settle / period).ceil();
        let horizon = (settle_periods + RECORD_PERIODS as f64) * period;
        Ok(Self { dt, horizon })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub omega: f64,
    pub probe_ratio: f64,
    pub a_plus_td: Complex64,
    pub a_plus_lin: Complex64,
    pub a_minus_td: Complex64,
    /// Linear a₋ rotated into the lab phase of the pump, e^{2iφ}·a₋.
    pub a_minus_lin: Complex64,
    pub rel_err_aplus: f64,
    pub rel_err_aminus: f64,
    pub linearity_defect: f64,
    pub residual_harmonics: f64,
}

/// Probe-to-pump amplitude ratio √(P_pr/P_pu) of a drive configuration.
pub fn probe_ratio(drive: &DriveConfig) -> Result<f64> {
    if !(drive.pump_power_w > 0.0) {
        return Err(Error::InvalidInput(
            "probe ratio needs a pump power above 0 W".into(),
        ));
    }
    Ok((drive.probe_power_w / drive.pump_power_w).sqrt())
}

/// Samples per beat period used by [`crosscheck`].
pub const CROSSCHECK_SAMPLES_PER_PERIOD: usize = 128;

/// Compare the time-domain sidebands against the linearized solve at
/// probe amplitudes E_pr = ratio·E_pu and half of that.
pub fn crosscheck(
    model: &DeviceModel,
    drive: &DriveConfig,
    omega: f64,
    probe_ratio: f64,
) -> Result<CrosscheckReport> {
    crosscheck_with(
        model,
        drive,
        omega,
        probe_ratio,
        CROSSCHECK_SAMPLES_PER_PERIOD,
    )
}

pub fn crosscheck_with(
    model: &DeviceModel,
    drive: &DriveConfig,
    omega: f64,
    probe_ratio: f64,
    samples_per_period: usize,
) -> Result<CrosscheckReport> {
    if !(probe_ratio > 0.0 && probe_ratio <= 1e-2) {
        return Err(Error::InvalidInput(format!(
            "probe ratio must lie in (0, 1e-2], got {probe_ratio}"
        )));
    }
    let steady = steady_state(model, drive, RootPolicy::RequireUnique)?;
    let grid = TimeGrid::for_beat(model, &steady, omega, samples_per_period)?;
    let e_pu = pump_amplitude(drive, &model.cavity)?;
    // With no pump, fall back to the configured probe as the reference scale.
    let reference = if e_pu > 0.0 {
        e_pu
    } else {
        probe_amplitude(drive, &model.cavity, omega)?.max(1.0)
    };
    let initial = InitialState::at_rest(&steady);

    let run = |e_pr: f64| -> Result<SidebandEstimate> {
        let integrator = Integrator {
            model,
            pump_detuning: drive.pump_detuning(),
            e_pu,
            e_pr,
            omega,
        };
        let trace = integrator.run(&initial, grid.horizon, grid.dt)?;
        extract_sideband(&trace, &steady)
    };
    let e_pr = probe_ratio * reference;
    let full = run(e_pr)?;
    let half = run(0.5 * e_pr)?;

    let lin = sideband_general(model, &steady, omega)?;
    let a_plus_td = full.a_plus_td / e_pr;
    let a_minus_td = full.a_minus_td / e_pr;
    let a_minus_lin = lin.a_minus * Complex64::from_polar(1.0, 2.0 * steady.phase);
    let rel_err_aminus = if a_minus_lin.norm() > 0.0 {
        (a_minus_td - a_minus_lin).norm() / a_minus_lin.norm()
    } else {
        a_minus_td.norm()
    };
    let half_plus = half.a_plus_td / (0.5 * e_pr);

    Ok(CrosscheckReport {
        omega,
        probe_ratio,
        a_plus_td,
        a_plus_lin: lin.a_plus,
        a_minus_td,
        a_minus_lin,
        rel_err_aplus: (a_plus_td - lin.a_plus).norm() / lin.a_plus.norm(),
        rel_err_aminus,
        linearity_defect: (a_plus_td - half_plus).norm() / a_plus_td.norm(),
        residual_harmonics: full.residual_harmonics,
    })
}
