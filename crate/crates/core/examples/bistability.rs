//! A strongly pumped single-mode device where the photon-number cubic has
//! three real roots. The default policy refuses to pick one; explicit
//! policies select the lowest or highest branch.

use emit_lab::model::bistable_device;
use emit_lab::steadystate::{solve_photon_number, steady_state, RootPolicy};

fn main() -> emit_lab::Result<()> {
    let (model, drive) = bistable_device();
    for s in solve_photon_number(&model, &drive)? {
        println!(
            "{:<6} n_p = {:.6e}  Δ/2π = {:9.3} Hz  stable = {}",
            s.branch.as_str(),
            s.n_p,
            s.delta_eff / std::f64::consts::TAU,
            s.stable
        );
    }
    match steady_state(&model, &drive, RootPolicy::RequireUnique) {
        Err(e) => println!("default policy: {e}"),
        Ok(_) => unreachable!("three roots expected"),
    }
    let hi = steady_state(&model, &drive, RootPolicy::Highest)?;
    println!("highest branch: n_p = {:.6e}", hi.n_p);
    Ok(())
}
