//! Behavioral tests for the command-line surface: flag validation, exit
//! codes, and the self-reproducing output header.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rashomon"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn iris_path() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/iris.csv")
        .display()
        .to_string()
}

#[test]
fn invalid_flags_fail_with_nonzero_exit() {
    let out = run(&["gauss-ratio", "--d", "not-a-number"]);
    assert!(!out.status.success());
    assert!(!stderr(&out).is_empty());
    let out = run(&["no-such-subcommand"]);
    assert!(!out.status.success());
}

#[test]
fn runtime_errors_are_single_line_diagnostics() {
    let out = run(&[
        "relu-bound",
        "--data",
        "/nonexistent.csv",
        "--classes",
        "a,b",
        "--m",
        "4",
    ]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert_eq!(err.trim_end().lines().count(), 1, "stderr: {err}");
    assert!(err.starts_with("error: "));
}

#[test]
fn subset_plan_needs_exactly_one_input() {
    let out = run(&["subset-plan", "--delta", "0.1"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("exactly one"));
    let out = run(&[
        "subset-plan",
        "--ratio",
        "0.5",
        "--n-subset",
        "3",
        "--delta",
        "0.1",
    ]);
    assert!(!out.status.success());
}

#[test]
fn subset_plan_reports_both_directions() {
    let out = run(&["subset-plan", "--ratio", "0.53", "--delta", "0.01"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# n_subset = 7"), "{text}");
    assert!(text.contains("n_subset_raw = 6.09938"), "{text}");
    let out = run(&["subset-plan", "--n-subset", "1", "--delta", "0.1"]);
    let text = stdout(&out);
    assert!(text.contains("# ratio = 0.900000"), "{text}");
}

#[test]
fn gauss_ratio_reproduces_the_reference_point() {
    let out = run(&[
        "gauss-ratio",
        "--d",
        "1",
        "--sigma",
        "1",
        "--dist",
        "2",
        "--gamma",
        "0.05",
        "--n",
        "1000",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let ratio: f64 = text
        .lines()
        .find(|l| l.starts_with("# ratio = "))
        .unwrap()
        .trim_start_matches("# ratio = ")
        .parse()
        .unwrap();
    assert!((ratio - 0.375).abs() <= 0.05, "ratio {ratio}");
}

#[test]
fn subset_plan_handles_tiny_ratios() {
    let out = run(&["subset-plan", "--ratio", "0.5e-8", "--delta", "0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let n: f64 = text
        .lines()
        .find(|l| l.starts_with("# n_subset = "))
        .unwrap()
        .trim_start_matches("# n_subset = ")
        .parse()
        .unwrap();
    assert!((n - 4.605e8).abs() <= 0.005 * 4.605e8, "n {n}");
}

#[test]
fn gauss_ratio_zero_distance_is_exactly_one() {
    let out = run(&[
        "gauss-ratio",
        "--d",
        "1",
        "--dist",
        "0",
        "--n",
        "50",
        "--format",
        "pretty",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("# ratio = 1.00000"));
}

#[test]
fn gauss_sweep_rejects_empty_grid() {
    let out = run(&[
        "gauss-sweep",
        "--d",
        "1",
        "--dist-min",
        "5",
        "--dist-max",
        "1",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("empty grid"));
}

#[test]
fn tarp_rejects_zero_directions_and_missing_synthetic_flags() {
    let out = run(&[
        "tarp",
        "--d",
        "1",
        "--dist",
        "5",
        "--n",
        "100",
        "--n-directions",
        "0",
    ]);
    assert!(!out.status.success());
    let out = run(&["tarp", "--n-directions", "3"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("synthetic mode needs"));
}

#[test]
fn estimate_ratio_counts_a_loss_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("losses.txt");
    std::fs::write(&path, "# a comment\n0.01\n0.20\n0.04\n").unwrap();
    let out = run(&[
        "estimate-ratio",
        "--losses",
        path.to_str().unwrap(),
        "--gamma",
        "0.05",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("# count = 2 of 3"), "{text}");
    assert!(text.contains("0.666667,2,3,"), "{text}");
}

#[test]
fn relu_bound_single_cell_and_gram_export() {
    let dir = tempfile::tempdir().unwrap();
    let gram = dir.path().join("gram.csv");
    let out = run(&[
        "relu-bound",
        "--data",
        &iris_path(),
        "--classes",
        "Iris-setosa,Iris-versicolor",
        "--m",
        "4",
        "--gammas",
        "0.11",
        "--kappa-min",
        "5",
        "--kappa-max",
        "5",
        "--export-gram",
        gram.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2, "header plus one cell: {text}");
    assert!(rows[0].starts_with("kappa,gamma"));
    let gram_text = std::fs::read_to_string(&gram).unwrap();
    assert_eq!(gram_text.lines().count(), 100);
    // log-bound column is always finite even when the bound underflows
    let fields: Vec<&str> = rows[1].split(',').collect();
    let log_bound: f64 = fields[2].parse().unwrap();
    assert!(log_bound.is_finite());
}

#[test]
fn relu_bound_missing_class_fails() {
    let out = run(&[
        "relu-bound",
        "--data",
        &iris_path(),
        "--classes",
        "Iris-setosa,NoSuchClass",
        "--m",
        "4",
    ]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("missing class"));
}

#[test]
fn embedded_header_reproduces_the_file() {
    let first = run(&[
        "gauss-ratio",
        "--d",
        "2",
        "--dist",
        "3",
        "--n",
        "100",
        "--seed",
        "9",
    ]);
    assert!(first.status.success());
    let text = stdout(&first);
    let cmd_line = text
        .lines()
        .find(|l| l.starts_with("# cmd: "))
        .unwrap()
        .trim_start_matches("# cmd: ");
    let args: Vec<&str> = cmd_line.split_whitespace().skip(1).collect();
    let second = run(&args);
    assert!(second.status.success());
    assert_eq!(text, stdout(&second), "header rerun changed bytes");
}
