//! Integrate the full nonlinear equations on the scaled device and compare
//! the extracted sidebands with the linearized solution.

use std::f64::consts::TAU;

use emit_lab::figures::validation_frequencies;
use emit_lab::model::scaled_test_device;
use emit_lab::timedomain::crosscheck;

fn main() -> emit_lab::Result<()> {
    let (model, drive) = scaled_test_device();
    for omega in validation_frequencies(&model) {
        let r = crosscheck(&model, &drive, omega, 1e-3)?;
        println!(
            "Ω/2π = {:8.1} Hz  a₊ error {:.2e}  a₋ error {:.2e}  linearity {:.2e}  harmonics {:.2e}",
            omega / TAU,
            r.rel_err_aplus,
            r.rel_err_aminus,
            r.linearity_defect,
            r.residual_harmonics
        );
    }
    Ok(())
}
