//! Print the bundled configuration presets in the config file format.
//!
//! `cargo run --example write_configs -- configs` regenerates the files in
//! `configs/`.

use std::path::PathBuf;

use emit_lab::model::{bistable_device, reference_device, scaled_test_device, to_config_string};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from);
    let presets = [
        (
            "reference.cfg",
            "reference two-mode device",
            reference_device(),
        ),
        (
            "scaled.cfg",
            "scaled two-mode device for time-domain runs",
            scaled_test_device(),
        ),
        (
            "bistable.cfg",
            "single scaled mode with three steady-state roots",
            bistable_device(),
        ),
    ];
    for (name, title, (model, drive)) in presets {
        let text = format!("# {title}\n{}", to_config_string(&model, &drive));
        match &dir {
            Some(d) => std::fs::write(d.join(name), text)?,
            None => print!("## {name}\n{text}\n"),
        }
    }
    Ok(())
}
