//! Randomized checks of the tensor inequalities, the curl/advection identity
//! and the assembled forms.

fn main() {
    let seed = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed"));
    for r in smagfem::validate::run_all(seed) {
        println!(
            "{} {:<24} {:>8.2?}  {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.elapsed,
            r.detail
        );
    }
}
