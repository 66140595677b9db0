//! Dataset builders shared by the command line, the examples and the
//! acceptance suite, plus the parameter variants behind each reproduced
//! figure.
//!
//! Figure builders take a base configuration (normally
//! [`reference_device`](crate::model::reference_device)) and override only what
//! the figure varies: pump power, pump detuning, damping or the second
//! mode.

use std::f64::consts::TAU;

use crate::analysis::{
    delay_vs_power_with, find_transparency_peaks, linear_grid, log_grid, measure_window_near,
    width_vs_power_for_mode, SweepResult,
};
use crate::error::{Error, Result};
use crate::model::{to_config_string, DeviceModel, DriveConfig};
use crate::output::{Cell, Dataset, PlotSpec};
use crate::response::{cooperativity, spectrum_at, ResponsePoint};
use crate::steadystate::{steady_state, RootPolicy, SteadyState};
use crate::timedomain::CrosscheckReport;

pub const SPECTRUM_COLUMNS: [&str; 11] = [
    "omega_offset_hz",
    "re_tp",
    "im_tp",
    "abs_tp",
    "phase_t_rad",
    "tau_t_s",
    "re_rp",
    "im_rp",
    "phase_r_rad",
    "tau_r_s",
    "fwm_mag",
];

fn config_comment(dataset: &mut Dataset, model: &DeviceModel, drive: &DriveConfig) {
    dataset.comment(&to_config_string(model, drive));
}

fn hz(x: f64) -> f64 {
    x / TAU
}

/// One CSV row per root: n_p, re_a_s, q_s_k, Δ/2π, stability, branch.
pub fn steady_state_table(
    model: &DeviceModel,
    drive: &DriveConfig,
    roots: &[SteadyState],
) -> Dataset {
    let mut header = vec!["n_p".to_string(), "re_a_s".to_string()];
    header.extend((1..=model.n_modes()).map(|k| format!("q_s_{k}")));
    header.extend(["delta_eff_hz", "stable", "branch"].map(String::from));
    let mut d = Dataset {
        header,
        ..Dataset::new("steady_state", &[])
    };
    config_comment(&mut d, model, drive);
    for s in roots {
        let mut row: Vec<Cell> = vec![s.n_p.into(), s.a_s.re.into()];
        row.extend(s.q_s.iter().map(|&q| Cell::Num(q)));
        row.push(hz(s.delta_eff).into());
        row.push(if s.stable { "true" } else { "false" }.into());
        row.push(s.branch.as_str().into());
        d.push(row);
    }
    d
}

fn spectrum_row(model: &DeviceModel, p: &ResponsePoint) -> Vec<Cell> {
    vec![
        hz(p.omega - model.modes[0].omega()).into(),
        p.t_p.re.into(),
        p.t_p.im.into(),
        p.t_p.norm().into(),
        p.phase_t.into(),
        Cell::opt(p.tau_t),
        p.r_p.re.into(),
        p.r_p.im.into(),
        p.phase_r.into(),
        Cell::opt(p.tau_r),
        p.fwm_mag.into(),
    ]
}

/// Spectrum table with offsets relative to the first mechanical frequency.
pub fn spectrum_table(
    model: &DeviceModel,
    drive: &DriveConfig,
    points: &[ResponsePoint],
) -> Dataset {
    let mut d = Dataset::new("spectrum", &SPECTRUM_COLUMNS);
    config_comment(&mut d, model, drive);
    for p in points {
        d.push(spectrum_row(model, p));
    }
    d.plot = Some(PlotSpec {
        x: "omega_offset_hz".into(),
        y: vec!["abs_tp".into()],
        series: None,
        log_x: false,
    });
    d
}

/// Several spectra stacked in one table with a leading `series` column.
/// Offsets are relative to the first mode of `reference`.
fn stacked_spectra(
    name: &str,
    reference: &DeviceModel,
    parts: &[(String, Vec<ResponsePoint>)],
) -> Dataset {
    let mut header = vec!["series"];
    header.extend(SPECTRUM_COLUMNS);
    let mut d = Dataset::new(name, &header);
    for (label, points) in parts {
        for p in points {
            let mut row: Vec<Cell> = vec![label.as_str().into()];
            row.extend(spectrum_row(reference, p));
            d.push(row);
        }
    }
    d.plot = Some(PlotSpec {
        x: "omega_offset_hz".into(),
        y: vec!["abs_tp".into()],
        series: Some("series".into()),
        log_x: false,
    });
    d
}

fn sweep_header(model: &DeviceModel, with_series: bool) -> Vec<String> {
    let mut h: Vec<String> = Vec::new();
    if with_series {
        h.push("series".into());
    }
    h.extend(["power_w", "n_p"].map(String::from));
    h.extend((1..=model.n_modes()).map(|k| format!("c_{k}")));
    h.extend(["peak_rad_s", "fwhm_rad_s", "tau_t_s", "tau_r_s", "status"].map(String::from));
    h
}

fn sweep_rows(d: &mut Dataset, model: &DeviceModel, result: &SweepResult, series: Option<&str>) {
    for r in &result.rows {
        let mut row: Vec<Cell> = Vec::new();
        if let Some(s) = series {
            row.push(s.into());
        }
        row.push(r.value.into());
        row.push(Cell::opt(r.n_p));
        for k in 0..model.n_modes() {
            row.push(Cell::opt(r.cooperativity.get(k).copied()));
        }
        row.push(Cell::opt(r.peak));
        row.push(Cell::opt(r.fwhm));
        row.push(Cell::opt(r.tau_t));
        row.push(Cell::opt(r.tau_r));
        row.push(match &r.error {
            Some(e) => Cell::Text(format!("\"{}\"", e.replace('"', "'"))),
            None => "ok".into(),
        });
        d.push(row);
    }
}

fn sweep_summary(d: &mut Dataset, result: &SweepResult, prefix: &str) {
    if let Some(fit) = result.fit {
        d.comment(&format!("{prefix}fit.slope_rad_s_per_w = {:?}", fit.slope));
        d.comment(&format!(
            "{prefix}fit.intercept_rad_s = {:?}",
            fit.intercept
        ));
        d.comment(&format!("{prefix}fit.r_squared = {:?}", fit.r_squared));
    }
    if let Some(e) = result.extrema {
        d.comment(&format!("{prefix}max_tau_t_s = {:?}", e.max_tau_t));
        d.comment(&format!(
            "{prefix}power_at_max_tau_t_w = {:?}",
            e.power_at_max_tau_t
        ));
        d.comment(&format!("{prefix}min_tau_r_s = {:?}", e.min_tau_r));
        d.comment(&format!(
            "{prefix}power_at_min_tau_r_w = {:?}",
            e.power_at_min_tau_r
        ));
    }
}

/// One row per swept power; fit and extrema go into the comment block.
pub fn sweep_table(
    name: &str,
    model: &DeviceModel,
    drive: &DriveConfig,
    result: &SweepResult,
) -> Dataset {
    let header = sweep_header(model, false);
    let mut d = Dataset {
        header,
        ..Dataset::new(name, &[])
    };
    config_comment(&mut d, model, drive);
    sweep_summary(&mut d, result, "");
    sweep_rows(&mut d, model, result, None);
    d.plot = Some(sweep_plot(result));
    d
}

fn sweep_plot(result: &SweepResult) -> PlotSpec {
    let delays = result.extrema.is_some();
    PlotSpec {
        x: "power_w".into(),
        y: if delays {
            vec!["tau_t_s".into(), "tau_r_s".into()]
        } else {
            vec!["fwhm_rad_s".into()]
        },
        series: None,
        log_x: delays,
    }
}

pub fn crosscheck_table(
    model: &DeviceModel,
    drive: &DriveConfig,
    reports: &[CrosscheckReport],
) -> Dataset {
    let mut d = Dataset::new(
        "validate_td",
        &[
            "omega_hz",
            "probe_ratio",
            "re_aplus_td",
            "im_aplus_td",
            "re_aplus_lin",
            "im_aplus_lin",
            "re_aminus_td",
            "im_aminus_td",
            "re_aminus_lin",
            "im_aminus_lin",
            "rel_err_aplus",
            "rel_err_aminus",
            "linearity_defect",
            "residual_harmonics",
        ],
    );
    config_comment(&mut d, model, drive);
    for r in reports {
        d.push(vec![
            hz(r.omega).into(),
            r.probe_ratio.into(),
            r.a_plus_td.re.into(),
            r.a_plus_td.im.into(),
            r.a_plus_lin.re.into(),
            r.a_plus_lin.im.into(),
            r.a_minus_td.re.into(),
            r.a_minus_td.im.into(),
            r.a_minus_lin.re.into(),
            r.a_minus_lin.im.into(),
            r.rel_err_aplus.into(),
            r.rel_err_aminus.into(),
            r.linearity_defect.into(),
            r.residual_harmonics.into(),
        ]);
    }
    d
}

/// Probe detunings for time-domain validation: every mechanical frequency
/// and the midpoint between neighbouring ones, ascending.
pub fn validation_frequencies(model: &DeviceModel) -> Vec<f64> {
    let mut w: Vec<f64> = model.modes.iter().map(|m| m.omega()).collect();
    w.sort_by(f64::total_cmp);
    w.dedup();
    let mids: Vec<f64> = w.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    w.extend(mids);
    w.sort_by(f64::total_cmp);
    w
}

/// Probe detuning grid from offsets (Hz) relative to the first mode.
pub fn offset_grid(
    model: &DeviceModel,
    start_hz: f64,
    stop_hz: f64,
    points: usize,
) -> Result<Vec<f64>> {
    if points < 2 || !(stop_hz > start_hz) {
        return Err(Error::InvalidInput(format!(
            "grid needs start < stop and at least 2 points, got {start_hz}:{stop_hz}:{points}"
        )));
    }
    let w1 = model.modes[0].omega();
    Ok(linear_grid(start_hz, stop_hz, points)
        .into_iter()
        .map(|f| w1 + TAU * f)
        .collect())
}

/// Default spectrum grid (offsets in Hz): covers every mode and the cavity
/// dip with a linewidth of margin on each side.
pub fn default_offset_range(model: &DeviceModel, drive: &DriveConfig) -> (f64, f64, usize) {
    let w1 = model.modes[0].omega_hz;
    let kappa = model.cavity.kappa_hz;
    let mut lo = drive.pump_detuning_hz;
    let mut hi = drive.pump_detuning_hz;
    for m in &model.modes {
        lo = lo.min(m.omega_hz);
        hi = hi.max(m.omega_hz);
    }
    ((lo - kappa - w1).max(-w1), hi + kappa - w1, 8001)
}

pub fn with_pump(drive: &DriveConfig, power_w: f64, detuning_hz: f64) -> DriveConfig {
    DriveConfig {
        pump_power_w: power_w,
        pump_detuning_hz: detuning_hz,
        ..drive.clone()
    }
}

/// Second mode moved onto the first with the same coupling and damping.
pub fn degenerate_variant(model: &DeviceModel) -> DeviceModel {
    let mut m = model.clone();
    let first = m.modes[0].clone();
    for mode in m.modes.iter_mut().skip(1) {
        mode.omega_hz = first.omega_hz;
        mode.gamma_hz = first.gamma_hz;
        mode.g_hz = first.g_hz;
    }
    m
}

/// Every mode but the first decoupled.
pub fn single_oscillator_variant(model: &DeviceModel) -> DeviceModel {
    let mut m = model.clone();
    for mode in m.modes.iter_mut().skip(1) {
        mode.g_hz = 0.0;
    }
    m
}

/// All mechanical dampings scaled by `factor`.
pub fn damping_variant(model: &DeviceModel, factor: f64) -> DeviceModel {
    let mut m = model.clone();
    for mode in &mut m.modes {
        mode.gamma_hz *= factor;
    }
    m
}

pub const FIG2_POWER_W: f64 = 4e-6;
pub const FIG3_POWER_W: f64 = 1e-6;
pub const FIG4_POWERS_W: [f64; 3] = [0.5e-6, 1e-6, 1.5e-6];
/// (lo, hi, n) of the width-vs-power inset sweep.
pub const FIG4_WIDTH_SWEEP: (f64, f64, usize) = (0.1e-6, 1.5e-6, 15);
/// (lo, hi, n) of the log power grid for delay sweeps.
pub const FIG5_POWER_GRID: (f64, f64, usize) = (1e-9, 2e-6, 61);

fn mean_mode_hz(model: &DeviceModel) -> f64 {
    model.modes.iter().map(|m| m.omega_hz).sum::<f64>() / model.n_modes() as f64
}

fn spectrum_points(
    model: &DeviceModel,
    drive: &DriveConfig,
    grid: &[f64],
) -> Result<(SteadyState, Vec<ResponsePoint>)> {
    let s = steady_state(model, drive, RootPolicy::RequireUnique)?;
    let points = spectrum_at(model, &s, grid)?;
    Ok((s, points))
}

/// Window summary rows for the degenerate and single-oscillator devices.
pub struct Figure2Widths {
    pub label: &'static str,
    pub fwhm: f64,
    pub cooperativity: f64,
    /// γ₁(1 + ΣC) over the modes sharing the window.
    pub expected: f64,
}

pub fn figure2_widths(model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<Figure2Widths>> {
    let drive = with_pump(drive, FIG2_POWER_W, model.modes[0].omega_hz);
    let variants = [
        ("degenerate", degenerate_variant(model)),
        ("single", single_oscillator_variant(model)),
    ];
    variants
        .into_iter()
        .map(|(label, m)| {
            let s = steady_state(&m, &drive, RootPolicy::RequireUnique)?;
            let c1 = cooperativity(&m, &s, 0);
            let c_total: f64 = (0..m.n_modes()).map(|k| cooperativity(&m, &s, k)).sum();
            let expected = m.modes[0].gamma() * (1.0 + c_total);
            let (_, fwhm) = measure_window_near(&m, &s, m.modes[0].omega(), expected)?;
            Ok(Figure2Widths {
                label,
                fwhm,
                cooperativity: c1,
                expected,
            })
        })
        .collect()
}

pub fn figure2(model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<Dataset>> {
    let drive = with_pump(drive, FIG2_POWER_W, model.modes[0].omega_hz);
    let span = model.cavity.kappa_hz;
    let grid = offset_grid(model, -0.5 * span, 0.5 * span, 6201)?;
    let mut parts = Vec::new();
    for (label, m) in [
        ("degenerate", degenerate_variant(model)),
        ("single", single_oscillator_variant(model)),
    ] {
        let (_, points) = spectrum_points(&m, &drive, &grid)?;
        parts.push((label.to_string(), points));
    }
    let mut spectra = stacked_spectra("spectra", model, &parts);
    config_comment(&mut spectra, model, &drive);
    spectra.comment(
        "series degenerate: every mode takes the first mode's frequency, damping and coupling",
    );
    spectra.comment("series single: every mode but the first has zero coupling");

    let mut widths = Dataset::new(
        "widths",
        &["series", "c_1", "fwhm_rad_s", "expected_rad_s", "ratio"],
    );
    config_comment(&mut widths, model, &drive);
    for w in figure2_widths(model, &drive)? {
        widths.push(vec![
            w.label.into(),
            w.cooperativity.into(),
            w.fwhm.into(),
            w.expected.into(),
            (w.fwhm / w.expected).into(),
        ]);
    }
    Ok(vec![spectra, widths])
}

/// Offsets (Hz) spanning every window with half the mode spread as margin.
fn window_offsets(model: &DeviceModel) -> (f64, f64) {
    let w1 = model.modes[0].omega_hz;
    let lo = model
        .modes
        .iter()
        .map(|m| m.omega_hz)
        .fold(f64::MAX, f64::min)
        - w1;
    let hi = model
        .modes
        .iter()
        .map(|m| m.omega_hz)
        .fold(f64::MIN, f64::max)
        - w1;
    let margin = if hi > lo {
        0.75 * (hi - lo)
    } else {
        0.25 * model.cavity.kappa_hz
    };
    (lo - margin, hi + margin)
}

pub const WINDOW_GRID_POINTS: usize = 2001;

pub fn figure3(model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<Dataset>> {
    let drive = with_pump(drive, FIG3_POWER_W, mean_mode_hz(model));
    let (lo, hi) = window_offsets(model);
    let grid = offset_grid(model, lo, hi, WINDOW_GRID_POINTS)?;
    let (_, points) = spectrum_points(model, &drive, &grid)?;
    let mut peaks = Dataset::new("peaks", &["omega_offset_hz", "abs_tp"]);
    config_comment(&mut peaks, model, &drive);
    for p in find_transparency_peaks(&points) {
        peaks.push(vec![
            hz(p.omega - model.modes[0].omega()).into(),
            p.magnitude.into(),
        ]);
    }
    Ok(vec![spectrum_table(model, &drive, &points), peaks])
}

pub fn figure4(model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<Dataset>> {
    let drive = with_pump(drive, drive.pump_power_w, mean_mode_hz(model));
    let (lo, hi) = window_offsets(model);
    let grid = offset_grid(model, lo, hi, WINDOW_GRID_POINTS)?;
    let mut parts = Vec::new();
    for p in FIG4_POWERS_W {
        let (_, points) = spectrum_points(model, &drive.with_pump_power(p), &grid)?;
        parts.push((format!("{p:e}"), points));
    }
    let mut spectra = stacked_spectra("spectra", model, &parts);
    config_comment(&mut spectra, model, &drive);
    spectra.comment("series: pump power in W, replacing drive.pump_power_w");

    let (p0, p1, n) = FIG4_WIDTH_SWEEP;
    let sweep = width_vs_power_for_mode(
        model,
        &drive,
        &linear_grid(p0, p1, n),
        0,
        RootPolicy::RequireUnique,
    )?;
    let width = sweep_table("width", model, &drive, &sweep);
    Ok(vec![spectra, width])
}

/// Damping scale factors of the two delay sweeps.
pub const FIG5_DAMPING_SCALES: [f64; 2] = [1.0, 0.5];

pub fn figure5_sweeps(
    model: &DeviceModel,
    drive: &DriveConfig,
) -> Result<Vec<(f64, DeviceModel, SweepResult)>> {
    let drive = with_pump(drive, drive.pump_power_w, mean_mode_hz(model));
    let (p0, p1, n) = FIG5_POWER_GRID;
    let powers = log_grid(p0, p1, n);
    FIG5_DAMPING_SCALES
        .iter()
        .map(|&f| {
            let m = damping_variant(model, f);
            let omega = m.modes[0].omega();
            let r = delay_vs_power_with(&m, &drive, &powers, omega, RootPolicy::RequireUnique)?;
            Ok((f, m, r))
        })
        .collect()
}

pub fn figure5(model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<Dataset>> {
    let sweeps = figure5_sweeps(model, drive)?;
    let drive = with_pump(drive, drive.pump_power_w, mean_mode_hz(model));
    let mut d = Dataset {
        header: sweep_header(model, true),
        ..Dataset::new("delay", &[])
    };
    config_comment(&mut d, model, &drive);
    d.comment(
        "series: factor applied to every mode.k.gamma_hz; probe detuning fixed at the first mode",
    );
    for (f, _, r) in &sweeps {
        sweep_summary(&mut d, r, &format!("gamma_scale_{f}."));
    }
    for (f, m, r) in &sweeps {
        sweep_rows(&mut d, m, r, Some(&format!("gamma_scale_{f}")));
    }
    d.plot = Some(PlotSpec {
        series: Some("series".into()),
        ..sweep_plot(&sweeps[0].2)
    });
    Ok(vec![d])
}

/// Datasets for one of the reproduced figures (2 to 5).
pub fn reproduce(figure: u8, model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<Dataset>> {
    match figure {
        2 => figure2(model, drive),
        3 => figure3(model, drive),
        4 => figure4(model, drive),
        5 => figure5(model, drive),
        n => Err(Error::Usage(format!(
            "no reproduction for figure {n}; expected 2, 3, 4 or 5"
        ))),
    }
}
