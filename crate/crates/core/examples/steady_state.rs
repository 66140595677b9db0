//! Pump-dressed operating point of the reference device: photon number,
//! static displacements, effective detuning and the eigenvalues of the
//! linearized drift matrix.

use std::f64::consts::TAU;

use emit_lab::model::reference_device;
use emit_lab::steadystate::{drift_eigenvalues, steady_state, RootPolicy};

fn main() -> emit_lab::Result<()> {
    let (model, drive) = reference_device();
    let s = steady_state(&model, &drive, RootPolicy::RequireUnique)?;
    println!("pump power        {:e} W", drive.pump_power_w);
    println!("photon number     {:.6e}", s.n_p);
    for (m, q) in model.modes.iter().zip(&s.q_s) {
        println!("Q_s ({})      {q:.6e}", m.label);
    }
    println!("Δ_pu/2π           {:.3} kHz", s.pump_detuning / TAU / 1e3);
    println!("Δ/2π              {:.3} kHz", s.delta_eff / TAU / 1e3);
    println!("stable            {}", s.stable);
    let mut eig = drift_eigenvalues(&model, &s);
    eig.sort_by(|a, b| a.im.total_cmp(&b.im));
    for z in eig {
        println!("λ/2π = {:+.4e} {:+.6e}i Hz", z.re / TAU, z.im / TAU);
    }
    Ok(())
}
