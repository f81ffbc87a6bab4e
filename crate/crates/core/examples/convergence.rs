//! Mesh-sequence studies for the two manufactured solutions.
//!
//! ```text
//! cargo run --release --example convergence -- [levels]
//! ```

use smagfem::study::{level_resolutions, linear_model_study, navier_stokes_study, NsStudy, StudyTable};

fn print(title: &str, t: &StudyTable) {
    println!("{title}");
    println!("{:>5} {:>10} {:>12} {:>12} {:>10}", "n", "h", "L2", "H1", "div ratio");
    for l in &t.levels {
        println!(
            "{:>5} {:>10.4e} {:>12.4e} {:>12.4e} {:>10.1e}",
            l.resolution, l.h, l.l2, l.h1, l.max_divergence_ratio
        );
    }
    println!("slopes: L2 {:.3}, H1 {:.3}\n", t.l2_slope, t.h1_slope);
}

fn main() -> smagfem::Result<()> {
    let levels = std::env::args().nth(1).map_or(3, |s| s.parse().expect("levels"));
    let res = level_resolutions(levels)?;
    print("linear model, gamma = 1, sigma = 4", &linear_model_study(&res, 1.0)?);
    print("linear model, gamma = 0", &linear_model_study(&res, 0.0)?);
    print("Navier-Stokes, mu = h, gamma = 1", &navier_stokes_study(&res, &NsStudy::default())?);
    Ok(())
}
