//! Command-line front end.
//!
//! ```text
//! emit-lab <subcommand> [--config <path>] [--set k=v]... [-o <path>] [--plot]
//!          [--figure N] [--root lowest|highest] [--grid start_hz:stop_hz:points]
//!          [--powers lo_w:hi_w:points] [--dump-trace <path>]
//! ```
//!
//! Without `--config` the reference device is used (the scaled device for
//! `validate-td`). Exit status: 0 on success, 1 for usage and validation
//! errors, 2 for numerical failures.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;

use crate::analysis::{delay_vs_power_with, linear_grid, log_grid, width_vs_power_for_mode};
use crate::error::{Error, Result};
use crate::figures::{
    crosscheck_table, default_offset_range, offset_grid, reproduce, spectrum_table,
    steady_state_table, sweep_table, validation_frequencies, FIG4_WIDTH_SWEEP, FIG5_POWER_GRID,
};
use crate::model::{
    reference_device, scaled_test_device, to_config_string, ConfigDocument, DeviceModel,
    DriveConfig,
};
use crate::output::{sibling_path, write_atomic, Dataset};
use crate::response::spectrum_at;
use crate::steadystate::{solve_photon_number, steady_state, RootPolicy};
use crate::timedomain::{
    crosscheck, probe_ratio, InitialState, Integrator, TimeGrid, CROSSCHECK_SAMPLES_PER_PERIOD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    SteadyState,
    Spectrum,
    SweepWidth,
    SweepDelay,
    ValidateTd,
    Reproduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootChoice {
    Lowest,
    Highest,
}

/// Parsed command line.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "emit-lab",
    version,
    about = "Multimode electromechanical transparency simulator"
)]
pub struct RunSpec {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// Configuration file (`key = value` lines).
    #[arg(long = "config")]
    pub config_path: Option<PathBuf>,
    /// Override a configuration value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output CSV path; standard output when absent.
    #[arg(short = 'o', long = "output")]
    pub output_path: Option<PathBuf>,
    /// Also write an SVG line plot next to each CSV (requires -o).
    #[arg(long)]
    pub plot: bool,
    /// reproduce: which figure (2 to 5) to regenerate
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=5))]
    pub figure: Option<u8>,
    /// Branch to use when the steady state is bistable.
    #[arg(long, value_enum)]
    pub root: Option<RootChoice>,
    /// Probe grid as offsets from the first mechanical frequency.
    #[arg(
        long,
        value_name = "START_HZ:STOP_HZ:POINTS",
        allow_hyphen_values = true
    )]
    pub grid: Option<String>,
    /// Pump powers for sweeps (linear for sweep-width, logarithmic for sweep-delay).
    #[arg(long, value_name = "LO_W:HI_W:POINTS")]
    pub powers: Option<String>,
    /// validate-td: write the sampled trace at the first probe detuning.
    #[arg(long, value_name = "PATH")]
    pub dump_trace: Option<PathBuf>,
}

impl RunSpec {
    fn policy(&self) -> RootPolicy {
        match self.root {
            None => RootPolicy::RequireUnique,
            Some(RootChoice::Lowest) => RootPolicy::Lowest,
            Some(RootChoice::Highest) => RootPolicy::Highest,
        }
    }
}

/// Run with process-style arguments (program name first). Returns the exit
/// status; messages go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let spec = match RunSpec::try_parse_from(argv) {
        Ok(spec) => spec,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&spec) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn parse_triple(flag: &str, text: &str) -> Result<(f64, f64, usize)> {
    let usage = || Error::Usage(format!("--{flag} expects start:stop:points, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(usage());
    };
    let a: f64 = a.trim().parse().map_err(|_| usage())?;
    let b: f64 = b.trim().parse().map_err(|_| usage())?;
    let n: usize = n.trim().parse().map_err(|_| usage())?;
    if !(a.is_finite() && b.is_finite()) || n == 0 {
        return Err(usage());
    }
    Ok((a, b, n))
}

/// Resolve the configuration: file or preset, then overrides, then
/// validation.
pub fn load_config(spec: &RunSpec) -> Result<(DeviceModel, DriveConfig)> {
    let mut doc = match &spec.config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            ConfigDocument::parse(&text)?
        }
        None => {
            let (m, d) = if spec.subcommand == Subcommand::ValidateTd {
                scaled_test_device()
            } else {
                reference_device()
            };
            ConfigDocument::parse(&to_config_string(&m, &d))?
        }
    };
    for o in &spec.overrides {
        doc.apply_override(o)?;
    }
    doc.build()
}

pub fn execute(spec: &RunSpec) -> Result<()> {
    if spec.plot && spec.output_path.is_none() {
        return Err(Error::Usage("--plot requires -o <path>".into()));
    }
    if spec.figure.is_some() != (spec.subcommand == Subcommand::Reproduce) {
        return Err(Error::Usage(
            "--figure is required by, and only valid for, reproduce".into(),
        ));
    }
    let (model, drive) = load_config(spec)?;
    let datasets = match spec.subcommand {
        Subcommand::SteadyState => {
            let roots = solve_photon_number(&model, &drive)?;
            if roots.len() > 1 && spec.root.is_none() {
                return Err(Error::Bistable { roots: roots.len() });
            }
            vec![steady_state_table(&model, &drive, &roots)]
        }
        Subcommand::Spectrum => {
            let (lo, hi, n) = match &spec.grid {
                Some(g) => parse_triple("grid", g)?,
                None => default_offset_range(&model, &drive),
            };
            let grid = offset_grid(&model, lo, hi, n)?;
            let steady = steady_state(&model, &drive, spec.policy())?;
            let points = spectrum_at(&model, &steady, &grid)?;
            vec![spectrum_table(&model, &drive, &points)]
        }
        Subcommand::SweepWidth => {
            let (lo, hi, n) = match &spec.powers {
                Some(p) => parse_triple("powers", p)?,
                None => FIG4_WIDTH_SWEEP,
            };
            let r =
                width_vs_power_for_mode(&model, &drive, &linear_grid(lo, hi, n), 0, spec.policy())?;
            vec![sweep_table("width", &model, &drive, &r)]
        }
        Subcommand::SweepDelay => {
            let (lo, hi, n) = match &spec.powers {
                Some(p) => parse_triple("powers", p)?,
                None => FIG5_POWER_GRID,
            };
            if !(lo > 0.0) {
                return Err(Error::Usage(
                    "--powers for sweep-delay must start above 0 W".into(),
                ));
            }
            let omega = model.modes[0].omega();
            let r =
                delay_vs_power_with(&model, &drive, &log_grid(lo, hi, n), omega, spec.policy())?;
            vec![sweep_table("delay", &model, &drive, &r)]
        }
        Subcommand::ValidateTd => validate_td(spec, &model, &drive)?,
        Subcommand::Reproduce => reproduce(spec.figure.expect("checked above"), &model, &drive)?,
    };
    emit(spec, &datasets)
}

fn validate_td(spec: &RunSpec, model: &DeviceModel, drive: &DriveConfig) -> Result<Vec<Dataset>> {
    let ratio = probe_ratio(drive)?;
    let omegas = validation_frequencies(model);
    let reports = omegas
        .par_iter()
        .map(|&w| crosscheck(model, drive, w, ratio))
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &spec.dump_trace {
        let steady = steady_state(model, drive, RootPolicy::RequireUnique)?;
        let grid = TimeGrid::for_beat(model, &steady, omegas[0], CROSSCHECK_SAMPLES_PER_PERIOD)?;
        let mut integrator = Integrator::from_drive(model, drive, omegas[0])?;
        integrator.e_pr = ratio * integrator.e_pu;
        let trace = integrator.run(&InitialState::at_rest(&steady), grid.horizon, grid.dt)?;
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        write_atomic(path, &String::from_utf8_lossy(&buf))?;
    }
    Ok(vec![crosscheck_table(model, drive, &reports)])
}

fn emit(spec: &RunSpec, datasets: &[Dataset]) -> Result<()> {
    match &spec.output_path {
        Some(path) => {
            for (i, d) in datasets.iter().enumerate() {
                let csv_path = if i == 0 {
                    path.clone()
                } else {
                    sibling_path(path, &d.name, "csv")
                };
                write_atomic(&csv_path, &d.to_csv())?;
                if spec.plot {
                    if let Some(svg) = d.to_svg() {
                        let name = if i == 0 { "" } else { d.name.as_str() };
                        write_atomic(&sibling_path(path, name, "svg"), &svg)?;
                    }
                }
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            for (i, d) in datasets.iter().enumerate() {
                if datasets.len() > 1 {
                    if i > 0 {
                        writeln!(out)?;
                    }
                    writeln!(out, "# dataset: {}", d.name)?;
                }
                out.write_all(d.to_csv().as_bytes())?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
