//! Feature extraction and pump-power sweeps.
//!
//! Window widths are measured on the power transmission |t_p|², relative to
//! the deeper of the two local minima that flank the window. On that scale
//! an isolated window sitting in the cavity dip is a Lorentzian of full
//! width γ_k(1 + C_k); on the amplitude |t_p| the same feature is about 40%
//! wider and not Lorentzian.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DeviceModel, DriveConfig};
use crate::response::{
    cooperativity, default_step, effective_linewidth, group_delay_at, transmission, ResponsePoint,
};
use crate::steadystate::{steady_state, RootPolicy, SteadyState};

/// Interior local maximum of |t_p|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Probe detuning of the maximum (rad/s), refined by a parabola.
    pub omega: f64,
    pub magnitude: f64,
}

/// Vertex of the parabola through three points; falls back to the middle
/// point when they are collinear.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d01 = (y[1] - y[0]) / (x[1] - x[0]);
    let d12 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d12 - d01) / (x[2] - x[0]);
    if curvature == 0.0 || !curvature.is_finite() {
        return (x[1], y[1]);
    }
    // y = y1 + d01'(x − x1) + c (x − x1)² with slope at x1 from both sides
    let slope = d01 + curvature * (x[1] - x[0]);
    let dx = -slope / (2.0 * curvature);
    (x[1] + dx, y[1] + 0.5 * slope * dx)
}

/// Interior local maxima of |t_p|, sorted by detuning.
pub fn find_transparency_peaks(spectrum: &[ResponsePoint]) -> Vec<Peak> {
    let x: Vec<f64> = spectrum.iter().map(|p| p.omega).collect();
    let y: Vec<f64> = spectrum.iter().map(|p| p.t_p.norm()).collect();
    local_maxima(&x, &y)
}

fn local_maxima(x: &[f64], y: &[f64]) -> Vec<Peak> {
    let mut peaks = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            let (omega, magnitude) =
                parabola_vertex([x[i - 1], x[i], x[i + 1]], [y[i - 1], y[i], y[i + 1]]);
            peaks.push(Peak { omega, magnitude });
        }
    }
    peaks
}

/// Full width at half maximum of the peak of `y` nearest `near`, measured
/// from the deeper adjacent local minimum. Crossings are linearly
/// interpolated.
pub fn feature_fwhm(x: &[f64], y: &[f64], near: f64) -> Result<f64> {
    let unresolved = Error::WindowNotResolved { omega: near };
    if x.len() != y.len() || x.len() < 3 {
        return Err(unresolved);
    }
    let mut i = match x.iter().position(|&v| v >= near) {
        Some(0) => 0,
        Some(j) if (x[j] - near) > (near - x[j - 1]) => j - 1,
        Some(j) => j,
        None => x.len() - 1,
    };
    // climb to the local maximum
    loop {
        if i + 1 < y.len() && y[i + 1] > y[i] {
            i += 1;
        } else if i > 0 && y[i - 1] > y[i] {
            i -= 1;
        } else {
            break;
        }
    }
    if i == 0 || i == y.len() - 1 {
        return Err(unresolved);
    }
    let mut left = i;
    while left > 0 && y[left - 1] <= y[left] {
        left -= 1;
    }
    let mut right = i;
    while right + 1 < y.len() && y[right + 1] <= y[right] {
        right += 1;
    }
    let baseline = y[left].min(y[right]);
    let height = y[i] - baseline;
    if !(height > 0.0) {
        return Err(unresolved);
    }
    let half = baseline + 0.5 * height;

    let mut j = i;
    while j > left && y[j] > half {
        j -= 1;
    }
    if y[j] > half {
        return Err(unresolved);
    }
    let x_left = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j]);

    let mut j = i;
    while j < right && y[j] > half {
        j += 1;
    }
    if y[j] > half {
        return Err(unresolved);
    }
    let x_right = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1]);
    Ok(x_right - x_left)
}

/// FWHM (rad/s) of the transparency window nearest `peak`, on |t_p|².
pub fn window_fwhm(spectrum: &[ResponsePoint], peak: f64) -> Result<f64> {
    let x: Vec<f64> = spectrum.iter().map(|p| p.omega).collect();
    let y: Vec<f64> = spectrum.iter().map(|p| p.t_p.norm_sqr()).collect();
    feature_fwhm(&x, &y, peak)
}

/// Least-squares straight line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PumpPowerW,
    DetuningRadPerS,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepRow {
    pub value: f64,
    pub n_p: Option<f64>,
    pub cooperativity: Vec<f64>,
    /// Refined window position (rad/s), width sweeps only.
    pub peak: Option<f64>,
    pub fwhm: Option<f64>,
    pub tau_t: Option<f64>,
    pub tau_r: Option<f64>,
    /// Why the row has no result, when it failed.
    pub error: Option<String>,
}

/// Extrema of the delay curves over power, grid-located then refined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayExtrema {
    pub max_tau_t: f64,
    pub power_at_max_tau_t: f64,
    pub min_tau_r: f64,
    pub power_at_min_tau_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
    pub fit: Option<LineFit>,
    pub extrema: Option<DelayExtrema>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == n - 1 => hi,
            i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| match i {
            i if i == n - 1 => hi,
            i => lo + (hi - lo) * i as f64 / (n - 1) as f64,
        })
        .collect()
}

fn check_axis(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty sweep axis".into()));
    }
    if values.len() > 1 && values.iter().all(|&v| v == values[0]) {
        return Err(Error::DegenerateFit("all sweep values are equal".into()));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "sweep axis must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn base_row(model: &DeviceModel, value: f64, steady: &SteadyState) -> SweepRow {
    SweepRow {
        value,
        n_p: Some(steady.n_p),
        cooperativity: (0..model.n_modes())
            .map(|k| cooperativity(model, steady, k))
            .collect(),
        ..SweepRow::default()
    }
}

fn failed_row(value: f64, err: Error) -> SweepRow {
    SweepRow {
        value,
        error: Some(err.to_string()),
        ..SweepRow::default()
    }
}

/// Grid points per effective linewidth used when resolving a window.
const POINTS_PER_LINEWIDTH: f64 = 100.0;
/// Half-span of the window grid in effective linewidths.
const SPAN_LINEWIDTHS: f64 = 8.0;

/// Locate and measure the window of mode `k`. Returns (peak, FWHM).
pub fn measure_window(model: &DeviceModel, steady: &SteadyState, k: usize) -> Result<(f64, f64)> {
    let width = effective_linewidth(model, steady, k);
    measure_window_near(model, steady, model.modes[k].omega(), width)
}

/// Locate and measure the window nearest `center` on a grid sized for an
/// expected width `width` (rad/s). Returns (peak, FWHM).
pub fn measure_window_near(
    model: &DeviceModel,
    steady: &SteadyState,
    center: f64,
    width: f64,
) -> Result<(f64, f64)> {
    let half_span = SPAN_LINEWIDTHS * width;
    let n = (2.0 * SPAN_LINEWIDTHS * POINTS_PER_LINEWIDTH) as usize + 1;
    let grid = linear_grid(center - half_span, center + half_span, n);
    let points: Vec<ResponsePoint> = grid
        .par_iter()
        .map(|&w| transmission(model, steady, w))
        .collect::<Result<_>>()?;
    let fwhm = window_fwhm(&points, center)?;
    let peak = find_transparency_peaks(&points)
        .into_iter()
        .min_by(|a, b| {
            (a.omega - center)
                .abs()
                .total_cmp(&(b.omega - center).abs())
        })
        .map(|p| p.omega)
        .ok_or(Error::WindowNotResolved { omega: center })?;
    Ok((peak, fwhm))
}

/// Width of the window of mode `k` against pump power, with a linear fit
/// over the rows that resolved.
pub fn width_vs_power_for_mode(
    model: &DeviceModel,
    drive: &DriveConfig,
    powers: &[f64],
    k: usize,
    policy: RootPolicy,
) -> Result<SweepResult> {
    check_axis(powers)?;
    if k >= model.n_modes() {
        return Err(Error::InvalidInput(format!("no mechanical mode {}", k + 1)));
    }
    let rows: Vec<SweepRow> = powers
        .par_iter()
        .map(|&p| {
            let steady = match steady_state(model, &drive.with_pump_power(p), policy) {
                Ok(s) => s,
                Err(e) => return failed_row(p, e),
            };
            let mut row = base_row(model, p, &steady);
            match measure_window(model, &steady, k) {
                Ok((peak, fwhm)) => {
                    row.peak = Some(peak);
                    row.fwhm = Some(fwhm);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.fwhm.map(|w| (r.value, w)))
        .unzip();
    let fit = linear_fit(&x, &y)?;
    Ok(SweepResult {
        axis: SweepAxis::PumpPowerW,
        rows,
        fit: Some(fit),
        extrema: None,
    })
}

/// Width of the first mode's window against pump power.
pub fn width_vs_power(
    model: &DeviceModel,
    drive: &DriveConfig,
    powers: &[f64],
) -> Result<SweepResult> {
    width_vs_power_for_mode(model, drive, powers, 0, RootPolicy::RequireUnique)
}

fn delays_at_power(
    model: &DeviceModel,
    drive: &DriveConfig,
    power: f64,
    omega: f64,
    policy: RootPolicy,
) -> Result<(SteadyState, f64, f64)> {
    let steady = steady_state(model, &drive.with_pump_power(power), policy)?;
    let (tau_t, tau_r) = group_delay_at(model, &steady, omega, default_step(model))?;
    Ok((steady, tau_t, tau_r))
}

/// Golden-section search for the maximum of `f` on [lo, hi].
fn golden_max(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() <= 1e-10 * (a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Refine a grid extremum at index `i` over its neighbours in log power.
fn refine(powers: &[f64], i: usize, grid_best: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let lo = powers[i.saturating_sub(1)].ln();
    let hi = powers[(i + 1).min(powers.len() - 1)].ln();
    let (x, fx) = golden_max(lo, hi, |x| f(x.exp()));
    if fx >= grid_best {
        (x.exp(), fx)
    } else {
        (powers[i], grid_best)
    }
}

/// Group delays at a fixed probe detuning against pump power.
///
/// Rows are evaluated at `omega` exactly, not at a re-located window peak.
/// The extrema over the grid are refined by golden-section search between
/// the neighbouring grid points; a refined value is only kept when it
/// improves on the grid value.
pub fn delay_vs_power_with(
    model: &DeviceModel,
    drive: &DriveConfig,
    powers: &[f64],
    omega: f64,
    policy: RootPolicy,
) -> Result<SweepResult> {
    check_axis(powers)?;
    let rows: Vec<SweepRow> = powers
        .par_iter()
        .map(|&p| match delays_at_power(model, drive, p, omega, policy) {
            Ok((steady, tau_t, tau_r)) => SweepRow {
                tau_t: Some(tau_t),
                tau_r: Some(tau_r),
                ..base_row(model, p, &steady)
            },
            Err(e) => failed_row(p, e),
        })
        .collect();

    let best = |key: fn(&SweepRow) -> Option<f64>| {
        rows.iter()
            .enumerate()
            .filter_map(|(i, r)| key(r).map(|v| (i, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    };
    let extrema = match (best(|r| r.tau_t), best(|r| r.tau_r.map(|v| -v))) {
        (Some((it, vt)), Some((ir, vr))) => {
            let eval = |p: f64| delays_at_power(model, drive, p, omega, policy);
            let (pt, max_t) = refine(powers, it, vt, |p| {
                eval(p).map(|(_, t, _)| t).unwrap_or(f64::NEG_INFINITY)
            });
            let (pr, neg_min_r) = refine(powers, ir, vr, |p| {
                eval(p).map(|(_, _, r)| -r).unwrap_or(f64::NEG_INFINITY)
            });
            Some(DelayExtrema {
                max_tau_t: max_t,
                power_at_max_tau_t: pt,
                min_tau_r: -neg_min_r,
                power_at_min_tau_r: pr,
            })
        }
        _ => None,
    };
    Ok(SweepResult {
        axis: SweepAxis::PumpPowerW,
        rows,
        fit: None,
        extrema,
    })
}

pub fn delay_vs_power(
    model: &DeviceModel,
    drive: &DriveConfig,
    powers: &[f64],
    omega: f64,
) -> Result<SweepResult> {
    delay_vs_power_with(model, drive, powers, omega, RootPolicy::RequireUnique)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_device;
    use crate::response::{spectrum_at, ResponsePoint};
    use num_complex::Complex64;

    fn fake(omega: f64, t: f64) -> ResponsePoint {
        let t_p = Complex64::new(t, 0.0);
        ResponsePoint {
            omega,
            a_plus: Complex64::new(0.0, 0.0),
            a_minus: Complex64::new(0.0, 0.0),
            q_plus: vec![],
            t_p,
            r_p: 1.0 - t_p,
            phase_t: 0.0,
            phase_r: 0.0,
            tau_t: None,
            tau_r: None,
            fwm_mag: 0.0,
        }
    }

    #[test]
    fn monotone_ramp_has_no_peaks() {
        let pts: Vec<_> = (0..50)
            .map(|i| fake(i as f64, 0.2 + 0.01 * i as f64))
            .collect();
        assert!(find_transparency_peaks(&pts).is_empty());
    }

    #[test]
    fn parabola_refinement_is_exact_for_quadratics() {
        let f = |x: f64| 3.0 - 2.0 * (x - 0.37) * (x - 0.37);
        let (x, y) = parabola_vertex([0.0, 0.5, 1.5], [f(0.0), f(0.5), f(1.5)]);
        assert!((x - 0.37).abs() < 1e-12);
        assert!((y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_width() {
        // absorption 1 − |t|² of the bare side-coupled cavity is a Lorentzian of FWHM κ
        let (model, drive) = reference_device();
        let s = steady_state(&model, &drive.with_pump_power(0.0), RootPolicy::default()).unwrap();
        let kappa = model.cavity.kappa();
        let center = drive.pump_detuning();
        let grid = linear_grid(center - 10.0 * kappa, center + 10.0 * kappa, 4001);
        let y: Vec<f64> = grid
            .iter()
            .map(|&w| 1.0 - transmission(&model, &s, w).unwrap().t_p.norm_sqr())
            .collect();
        let w = feature_fwhm(&grid, &y, center).unwrap();
        assert!((w / kappa - 1.0).abs() < 1e-2, "{}", w / kappa);
    }

    #[test]
    fn unresolved_window_reports_error() {
        // a bump that never falls to half height on the left
        let x: Vec<f64> = (0..7).map(f64::from).collect();
        let y = [0.9, 0.95, 1.0, 0.5, 0.1, 0.0, 0.05];
        assert!(matches!(
            feature_fwhm(&x, &y, 2.0),
            Err(Error::WindowNotResolved { .. })
        ));
    }

    #[test]
    fn fit_and_grids() {
        let fit = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-15 && (fit.intercept - 1.0).abs() < 1e-14);
        assert!((fit.r_squared - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[2.0, 2.0], &[1.0, 3.0]).is_err());
        let g = log_grid(1e-9, 2e-6, 61);
        assert_eq!((g[0], g[60]), (1e-9, 2e-6));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        let (model, drive) = reference_device();
        assert!(matches!(
            width_vs_power(&model, &drive, &[1e-7, 1e-7, 1e-7]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn window_width_tracks_effective_linewidth() {
        let (model, drive) = reference_device();
        let s = steady_state(
            &model,
            &drive.with_pump_power(0.5e-6),
            RootPolicy::default(),
        )
        .unwrap();
        let (peak, fwhm) = measure_window(&model, &s, 0).unwrap();
        let expect = effective_linewidth(&model, &s, 0);
        assert!((fwhm / expect - 1.0).abs() < 0.1, "{}", fwhm / expect);
        assert!((peak - model.modes[0].omega()).abs() < 0.1 * expect);
    }

    #[test]
    fn peaks_stable_under_refinement() {
        let (model, drive) = reference_device();
        let s = steady_state(&model, &drive, RootPolicy::default()).unwrap();
        let (w1, w2) = (model.modes[0].omega(), model.modes[1].omega());
        let lo = w1 - 0.5 * (w2 - w1);
        let hi = w2 + 0.5 * (w2 - w1);
        let coarse_grid = linear_grid(lo, hi, 401);
        let fine_grid = linear_grid(lo, hi, 801);
        let step = coarse_grid[1] - coarse_grid[0];
        let coarse = find_transparency_peaks(&spectrum_at(&model, &s, &coarse_grid).unwrap());
        let fine = find_transparency_peaks(&spectrum_at(&model, &s, &fine_grid).unwrap());
        assert_eq!(coarse.len(), 2);
        assert_eq!(fine.len(), 2);
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a.omega - b.omega).abs() < 0.5 * step);
        }
    }
}
