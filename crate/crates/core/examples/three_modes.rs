//! A device described in the configuration format with three mechanical
//! modes, one window per mode.

use std::f64::consts::TAU;

use emit_lab::analysis::find_transparency_peaks;
use emit_lab::figures::offset_grid;
use emit_lab::model::parse_config;
use emit_lab::response::spectrum;

const CONFIG: &str = "
cavity.omega_c_hz = 6.986e9
cavity.kappa_hz = 6.2e6
cavity.kappa_e_hz = 4.8e6
mode.1.omega_hz = 32.1e6
mode.1.gamma_hz = 930
mode.1.g_hz = 39
mode.2.omega_hz = 32.5e6
mode.2.gamma_hz = 930
mode.2.g_hz = 44
mode.3.omega_hz = 32.9e6
mode.3.gamma_hz = 500
mode.3.g_hz = 30
drive.pump_power_w = 0.5e-6
drive.pump_detuning = mean
";

fn main() -> emit_lab::Result<()> {
    let (model, drive) = parse_config(CONFIG)?;
    let grid = offset_grid(&model, -0.3e6, 1.1e6, 2801)?;
    let points = spectrum(&model, &drive, &grid)?;
    for p in find_transparency_peaks(&points) {
        println!(
            "window at {:+8.2} kHz from ω₁, |t| = {:.4}",
            (p.omega - model.modes[0].omega()) / TAU / 1e3,
            p.magnitude
        );
    }
    Ok(())
}
