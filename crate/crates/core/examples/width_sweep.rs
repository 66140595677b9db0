//! Width of the first transparency window against pump power, with the
//! straight-line fit.

use std::f64::consts::TAU;

use emit_lab::analysis::{linear_grid, width_vs_power};
use emit_lab::model::reference_device;

fn main() -> emit_lab::Result<()> {
    let (model, drive) = reference_device();
    let r = width_vs_power(&model, &drive, &linear_grid(0.1e-6, 1.5e-6, 15))?;
    for row in &r.rows {
        match (row.fwhm, &row.error) {
            (Some(w), _) => println!(
                "P = {:.2} μW  FWHM/2π = {:7.2} kHz  γ(1+C)/2π = {:7.2} kHz",
                row.value * 1e6,
                w / TAU / 1e3,
                model.modes[0].gamma_hz * (1.0 + row.cooperativity[0]) / 1e3
            ),
            (None, e) => println!(
                "P = {:.2} μW  failed: {}",
                row.value * 1e6,
                e.as_deref().unwrap_or("?")
            ),
        }
    }
    let fit = r.fit.expect("width sweeps carry a fit");
    println!(
        "slope = {:.4e} Hz/W, intercept = {:.1} Hz, R² = {:.6}",
        fit.slope / TAU,
        fit.intercept / TAU,
        fit.r_squared
    );
    Ok(())
}
