//! Transmitted delay and reflected advance at the first mechanical
//! frequency as the pump power is swept over several decades.

use emit_lab::analysis::{delay_vs_power, log_grid};
use emit_lab::model::reference_device;

fn main() -> emit_lab::Result<()> {
    let (model, drive) = reference_device();
    let powers = log_grid(1e-9, 2e-6, 61);
    let r = delay_vs_power(&model, &drive, &powers, model.modes[0].omega())?;
    for row in r.rows.iter().step_by(6) {
        println!(
            "P = {:.3e} W  τ_t = {:+.4e} s  τ_r = {:+.4e} s",
            row.value,
            row.tau_t.unwrap_or(f64::NAN),
            row.tau_r.unwrap_or(f64::NAN)
        );
    }
    if let Some(e) = r.extrema {
        println!(
            "max τ_t = {:.4} ms at {:.3e} W",
            e.max_tau_t * 1e3,
            e.power_at_max_tau_t
        );
        println!(
            "min τ_r = {:.4} ms at {:.3e} W",
            e.min_tau_r * 1e3,
            e.power_at_min_tau_r
        );
    }
    Ok(())
}
