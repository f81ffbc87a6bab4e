//! Flow past a cylinder at very low viscosity: the unstabilized run blows up,
//! the stabilized one stays bounded.
//!
//! ```text
//! cargo run --release --example cylinder -- [resolution] [t_end]
//! ```

use smagfem::config::{CaseId, SimConfig};
use smagfem::simulation::prepare;

fn main() -> smagfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let resolution = args.next().map_or(20, |s| s.parse().expect("resolution"));
    let t_end = args.next().map_or(1.0, |s| s.parse().expect("t_end"));
    for gamma in [0.0, 0.1] {
        let mut config = SimConfig::defaults(CaseId::Cylinder);
        config.resolution = resolution;
        config.mu = 1e-6;
        config.gamma = gamma;
        config.t_end = t_end;
        let prepared = prepare(&config)?;
        println!(
            "gamma = {gamma}: {} velocity dofs, {} macro cells",
            prepared.system.n_velocity(),
            prepared.system.n_pressure()
        );
        let report = prepared.run(&mut |_| {})?;
        for r in &report.rows {
            println!("  t = {:.2}  energy {:.6e}  max |w| {:.3e}", r.t, r.energy, r.max_vorticity);
        }
        match report.instability_time {
            Some(t) => println!("  {} at t = {t:.2}", report.flag),
            None => println!("  {} through t = {:.2}", report.flag, report.final_state.t),
        }
    }
    Ok(())
}
