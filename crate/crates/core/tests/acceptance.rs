//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any of them fails. The checks run one after another in a
//! single test so the reported runtimes are not inflated by other tests.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use smagfem::cli;
use smagfem::config::{serialize_config, CaseId, SimConfig};
use smagfem::diagnostics;
use smagfem::output::timeseries_string;
use smagfem::simulation::prepare;
use smagfem::solver::{RunFlag, RunReport};
use smagfem::study::{self, NsStudy, StudyTable};
use smagfem::validate;

struct Outcome {
    passed: bool,
    detail: String,
}

struct Ledger {
    lines: Vec<String>,
    failed: usize,
}

impl Ledger {
    fn record(&mut self, id: usize, name: &str, elapsed: Duration, limit: Option<Duration>, outcome: Outcome) {
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let passed = outcome.passed && in_time;
        let limit = limit.map(|l| format!(" (limit {l:.0?})")).unwrap_or_default();
        let line = format!(
            "{} {id:>2} {name:<30} {} [{elapsed:.2?}{limit}]",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
        println!("{line}");
        self.lines.push(line);
        if !passed {
            self.failed += 1;
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn run(config: &SimConfig) -> (smagfem::spaces::FESystem, RunReport) {
    let prepared = prepare(config).expect("valid configuration");
    let report = prepared.run(&mut |_| {}).expect("run completes");
    (prepared.system, report)
}

fn shear_config(resolution: usize, gamma: f64, t_end: f64) -> SimConfig {
    let mut c = SimConfig::defaults(CaseId::ShearLayer);
    c.resolution = resolution;
    c.gamma = gamma;
    c.mu = 0.0;
    c.t_end = t_end;
    c.output_every = 50;
    c
}

fn cli_run(args: &[&str]) -> i32 {
    let mut all = vec!["smagfem", "--deterministic"];
    all.extend_from_slice(args);
    cli::main_with_args(all)
}

fn same_bytes(path: &Path, expected: &str) -> bool {
    fs::read(path).map(|b| b == expected.as_bytes()).unwrap_or(false)
}

#[test]
fn acceptance() {
    cli::configure_threads(None, true);
    let mut ledger = Ledger {
        lines: Vec::new(),
        failed: 0,
    };

    // tensor inequalities
    let (checks, elapsed) = timed(|| {
        [
            validate::check_monotonicity(100_000, 0),
            validate::check_continuity(100_000, 0),
        ]
    });
    ledger.record(
        1,
        "tensor_inequalities",
        elapsed,
        Some(Duration::from_secs(5)),
        Outcome {
            passed: checks.iter().all(|c| c.passed),
            detail: checks.iter().map(|c| c.detail.clone()).collect::<Vec<_>>().join("; "),
        },
    );

    let (c, elapsed) = timed(|| validate::check_curl_advection(100, 0));
    ledger.record(
        2,
        "curl_advection_identity",
        elapsed,
        Some(Duration::from_secs(1)),
        Outcome {
            passed: c.passed,
            detail: c.detail,
        },
    );

    let resolutions = study::level_resolutions(4).unwrap();
    let (linear, elapsed) = timed(|| study::linear_model_study(&resolutions, 1.0).unwrap());
    ledger.record(
        3,
        "linear_model_rate",
        elapsed,
        Some(Duration::from_secs(120)),
        Outcome {
            passed: (1.4..=2.3).contains(&linear.l2_slope),
            detail: format!("L2 slope {:.3} (accepted 1.4..2.3)", linear.l2_slope),
        },
    );

    let (ns, elapsed) = timed(|| study::navier_stokes_study(&resolutions, &NsStudy::default()).unwrap());
    ledger.record(
        4,
        "navier_stokes_rate",
        elapsed,
        Some(Duration::from_secs(600)),
        Outcome {
            passed: ns.l2_slope >= 1.3,
            detail: format!(
                "L2 slope {:.3} >= 1.3, errors {}",
                ns.l2_slope,
                ns.levels.iter().map(|l| format!("{:.3e}", l.l2)).collect::<Vec<_>>().join(" ")
            ),
        },
    );

    let stable = shear_config(32, 0.1, 2.0);
    let ((_, energy_run), elapsed) = timed(|| run(&stable));
    let mut previous = energy_run.rows[0].energy;
    let mut worst_drift = f64::NEG_INFINITY;
    for s in &energy_run.steps {
        worst_drift = worst_drift.max((s.energy - previous) / previous);
        previous = s.energy;
    }
    ledger.record(
        5,
        "energy_stability",
        elapsed,
        Some(Duration::from_secs(120)),
        Outcome {
            passed: energy_run.flag == RunFlag::Ok
                && worst_drift <= 1e-3
                && energy_run.stab_time_integral.is_finite(),
            detail: format!(
                "{} steps, max relative energy change per step {worst_drift:.3e} (limit 1e-3), stabilization integral {:.4e}",
                energy_run.steps.len(),
                energy_run.stab_time_integral
            ),
        },
    );

    let ns_ratio = ns.levels.iter().map(|l| l.max_divergence_ratio).fold(0.0, f64::max);
    let shear_ratio = energy_run
        .steps
        .iter()
        .map(|s| s.div_weak / (1.0 + s.grad_norm))
        .fold(0.0, f64::max);
    ledger.record(
        6,
        "weak_incompressibility",
        Duration::ZERO,
        None,
        Outcome {
            passed: ns_ratio <= 1e-9 && shear_ratio <= 1e-9,
            detail: format!(
                "max |Bu|/(1+|grad u|): manufactured {ns_ratio:.2e}, shear layer {shear_ratio:.2e} (limit 1e-9)"
            ),
        },
    );

    let (c, elapsed) = timed(|| validate::check_skew_symmetry(100, 0));
    ledger.record(
        7,
        "skew_symmetry",
        elapsed,
        None,
        Outcome {
            passed: c.passed,
            detail: c.detail,
        },
    );

    let (runs, elapsed) = timed(|| {
        [0.1, 0.0].map(|gamma| {
            let (system, report) = run(&shear_config(64, gamma, 6.0));
            let w0 = report.rows[0].max_vorticity;
            let w6 = diagnostics::max_vorticity(&system, &report.final_state.u_prev);
            (report.final_state.t, w0, w6)
        })
    });
    let [(t_a, w0, w_stab), (t_b, _, w_plain)] = runs;
    let bound = 1.5 * w0;
    ledger.record(
        8,
        "shear_layer_stabilization",
        elapsed,
        Some(Duration::from_secs(600)),
        Outcome {
            passed: (t_a - 6.0).abs() < 1e-9 && (t_b - 6.0).abs() < 1e-9 && w_stab <= bound && w_plain > bound,
            detail: format!(
                "max|w(0)| {w0:.3}, bound {bound:.3}: gamma 0.1 gives {w_stab:.3}, gamma 0 gives {w_plain:.3}"
            ),
        },
    );

    let cylinder = |gamma: f64, t_end: f64| {
        let mut c = SimConfig::defaults(CaseId::Cylinder);
        c.mu = 1e-6;
        c.gamma = gamma;
        c.t_end = t_end;
        run(&c).1
    };
    let ((plain, stab), elapsed) = timed(|| (cylinder(0.0, 1.0), cylinder(0.1, 2.0)));
    let e0 = stab.rows[0].energy;
    let e_max = stab.rows.iter().map(|r| r.energy).fold(0.0, f64::max);
    let onset = plain.instability_time;
    ledger.record(
        9,
        "cylinder_instability_contrast",
        elapsed,
        Some(Duration::from_secs(600)),
        Outcome {
            passed: plain.flag == RunFlag::Instability
                && onset.is_some_and(|t| t <= 1.0)
                && stab.flag == RunFlag::Ok
                && (stab.final_state.t - 2.0).abs() < 1e-9
                && e_max.is_finite()
                && e_max <= 10.0 * e0,
            detail: format!(
                "gamma 0: {} at t = {}; gamma 0.1: {} at t = {:.2}, max energy {e_max:.4} (initial {e0:.4})",
                plain.flag,
                onset.map(|t| format!("{t:.2}")).unwrap_or_else(|| "-".into()),
                stab.flag,
                stab.final_state.t
            ),
        },
    );

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (identical, elapsed) = timed(|| {
        let converge = |case: &str, table: &StudyTable| {
            let code = cli_run(&["converge", "--case", case, "--levels", "4", "--out", out]);
            code == cli::EXIT_OK && same_bytes(&dir.path().join(format!("{case}_convergence.csv")), &table.to_csv())
        };
        let linear_ok = converge("mms_linear", &linear);
        let ns_ok = converge("mms_ns", &ns);
        let cfg = dir.path().join("shear.cfg");
        let mut c = stable.clone();
        c.out_dir = dir.path().join("shear");
        fs::write(&cfg, serialize_config(&c)).unwrap();
        let code = cli_run(&["run", "--config", cfg.to_str().unwrap()]);
        let shear_ok = code == cli::EXIT_OK
            && same_bytes(&c.out_dir.join("shear_layer.csv"), &timeseries_string(Some(&energy_run)));
        [linear_ok, ns_ok, shear_ok]
    });
    ledger.record(
        10,
        "determinism",
        elapsed,
        None,
        Outcome {
            passed: identical.iter().all(|&b| b),
            detail: format!(
                "byte-identical reruns: linear study {}, manufactured study {}, shear layer {}",
                identical[0], identical[1], identical[2]
            ),
        },
    );

    println!("{} of {} checks passed", ledger.lines.len() - ledger.failed, ledger.lines.len());
    assert_eq!(ledger.failed, 0, "failed checks:\n{}", ledger.lines.join("\n"));
}
