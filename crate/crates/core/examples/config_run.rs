//! Run a config file and write the CSV time series plus VTK snapshots.
//!
//! ```text
//! cargo run --release --example config_run -- examples/configs/cylinder.cfg
//! ```

use std::path::PathBuf;

use smagfem::config::parse_config;
use smagfem::output::{write_snapshot, write_timeseries};
use smagfem::simulation::prepare;

fn main() -> smagfem::Result<()> {
    let path = std::env::args().nth(1).expect("usage: config_run <file.cfg>");
    let config = parse_config(&std::fs::read_to_string(&path)?)?;
    let prepared = prepare(&config)?;
    let dir = PathBuf::from(&config.out_dir);
    let mut failed = None;
    let report = prepared.run(&mut |snap| {
        let file = dir.join(format!("snapshot_{:06}.vtk", snap.step_index));
        if let Err(e) = write_snapshot(&file, &prepared.system, snap.u, snap.p) {
            failed.get_or_insert(e);
        }
    })?;
    if let Some(e) = failed {
        return Err(e);
    }
    write_timeseries(&dir.join("series.csv"), &report)?;
    println!("{} at t = {:.3}; output in {}", report.flag, report.final_state.t, dir.display());
    Ok(())
}
