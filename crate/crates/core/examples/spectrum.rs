//! Probe transmission of the reference device with the pump halfway
//! between the two mechanical frequencies: two transparency windows inside
//! the cavity dip.

use std::f64::consts::TAU;

use emit_lab::analysis::{find_transparency_peaks, window_fwhm};
use emit_lab::figures::offset_grid;
use emit_lab::model::reference_device;
use emit_lab::response::{cooperativity, spectrum};

fn main() -> emit_lab::Result<()> {
    let (model, drive) = reference_device();
    let grid = offset_grid(&model, -0.3e6, 0.7e6, 2001)?;
    let points = spectrum(&model, &drive, &grid)?;
    for p in points.iter().step_by(100) {
        println!(
            "{:+9.1} kHz  |t| = {:.4}  arg t = {:+.4}  τ_t = {:+.3e} s",
            (p.omega - model.modes[0].omega()) / TAU / 1e3,
            p.t_p.norm(),
            p.phase_t,
            p.tau_t.unwrap_or(f64::NAN)
        );
    }
    let steady = emit_lab::steadystate::steady_state(&model, &drive, Default::default())?;
    for (k, peak) in find_transparency_peaks(&points).iter().enumerate() {
        let width = window_fwhm(&points, peak.omega)?;
        println!(
            "window {}: {:+.3} kHz from ω₁, |t| = {:.4}, FWHM/2π = {:.1} kHz, C = {:.1}",
            k + 1,
            (peak.omega - model.modes[0].omega()) / TAU / 1e3,
            peak.magnitude,
            width / TAU / 1e3,
            cooperativity(&model, &steady, k)
        );
    }
    Ok(())
}
