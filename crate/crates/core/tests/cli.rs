use std::fs;

use smagfem::cli::{main_with_args, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> i32 {
    let mut all = vec!["smagfem"];
    all.extend_from_slice(args);
    main_with_args(all)
}

#[test]
fn info_and_help_succeed() {
    assert_eq!(run(&["info"]), EXIT_OK);
    assert_eq!(run(&["--help"]), EXIT_OK);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(run(&["run"]), EXIT_USAGE);
    assert_eq!(run(&["run", "--case", "no_such_case"]), EXIT_USAGE);
    assert_eq!(run(&["converge", "--case", "cylinder"]), EXIT_USAGE);
    assert_eq!(run(&["converge", "--levels", "9"]), EXIT_USAGE);
    assert_eq!(run(&["run", "--config", "/nonexistent/run.cfg"]), EXIT_USAGE);
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "case = shear_layer\nresolution = many\n").unwrap();
    assert_eq!(run(&["run", "--config", cfg.to_str().unwrap()]), EXIT_USAGE);
}

#[test]
fn run_writes_series_snapshots_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    fs::write(
        &cfg,
        "case = shear_layer\nresolution = 6\ngamma = 0.1\ndt = 0.05\nt_end = 0.1\noutput_every = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let code = run(&["--deterministic", "run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let csv = fs::read_to_string(out.join("shear_layer.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for step in 0..=2 {
        assert!(out.join(format!("shear_layer_{step:06}.vtk")).exists());
    }
    let saved = fs::read_to_string(out.join("shear_layer.cfg")).unwrap();
    assert!(saved.contains("resolution = 6"));
}

#[test]
fn converge_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["converge", "--case", "mms_linear", "--levels", "2", "--out", out]), EXIT_OK);
    let table = fs::read_to_string(dir.path().join("mms_linear_convergence.csv")).unwrap();
    assert!(table.starts_with("resolution,h,"));
    assert!(table.contains("# l2_slope"));
}
