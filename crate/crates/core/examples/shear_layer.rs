//! Double shear layer with and without Smagorinsky stabilization.
//!
//! ```text
//! cargo run --release --example shear_layer -- [resolution] [t_end]
//! ```

use smagfem::config::{CaseId, SimConfig};
use smagfem::simulation::prepare;

fn main() -> smagfem::Result<()> {
    let mut args = std::env::args().skip(1);
    let resolution = args.next().map_or(32, |s| s.parse().expect("resolution"));
    let t_end = args.next().map_or(2.0, |s| s.parse().expect("t_end"));
    for gamma in [0.1, 0.0] {
        let mut config = SimConfig::defaults(CaseId::ShearLayer);
        config.resolution = resolution;
        config.gamma = gamma;
        config.t_end = t_end;
        config.output_every = 50;
        let prepared = prepare(&config)?;
        let report = prepared.run(&mut |_| {})?;
        println!("gamma = {gamma}");
        println!("{:>8} {:>14} {:>12} {:>12}", "t", "energy", "max |w|", "|u|_s");
        for r in &report.rows {
            println!("{:>8.3} {:>14.8} {:>12.4} {:>12.4e}", r.t, r.energy, r.max_vorticity, r.stab_seminorm);
        }
        println!("{} after {:.1?}, stabilization integral {:.4e}\n", report.flag, report.wall_time, report.stab_time_integral);
    }
    Ok(())
}
