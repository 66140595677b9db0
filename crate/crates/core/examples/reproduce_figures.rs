//! Write every reproduced figure dataset as CSV (and SVG) into a
//! directory, default `figures/`.

use std::path::PathBuf;

use emit_lab::figures::reproduce;
use emit_lab::model::reference_device;
use emit_lab::output::write_atomic;

fn main() -> emit_lab::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    std::fs::create_dir_all(&dir)?;
    let (model, drive) = reference_device();
    for figure in 2..=5 {
        for d in reproduce(figure, &model, &drive)? {
            let stem = dir.join(format!("fig{figure}_{}", d.name));
            write_atomic(&stem.with_extension("csv"), &d.to_csv())?;
            if let Some(svg) = d.to_svg() {
                write_atomic(&stem.with_extension("svg"), &svg)?;
            }
            println!(
                "{} ({} rows)",
                stem.with_extension("csv").display(),
                d.rows.len()
            );
        }
    }
    Ok(())
}
