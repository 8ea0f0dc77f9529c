//! End-to-end checks of the `spadepso` binary: argument handling, exit
//! codes, and the files an experiment leaves behind.

use std::path::Path;
use std::process::{Command, Output};

fn spadepso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spadepso"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn run_small(dir: &Path, optimizer: &str) -> Output {
    spadepso(&[
        "run",
        "--optimizer",
        optimizer,
        "--problem",
        "sphere",
        "--dim",
        "4",
        "--runs",
        "6",
        "--seed",
        "3",
        "--budget",
        "2000",
        "--out",
        dir.to_str().expect("utf-8 path"),
    ])
}

#[test]
fn spa_demo_prints_the_walkthrough() {
    let output = spadepso(&["spa-demo"]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("particle 3"), "{text}");
    assert!(text.contains("5000/1779"), "{text}");
}

#[test]
fn run_writes_the_report_artifacts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = run_small(dir.path(), "spade");
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("sphere D4"), "{text}");
    assert!(text.contains("report written to"), "{text}");
    assert!(dir.path().join("report.json").is_file());
    assert!(dir.path().join("summary.csv").is_file());
    assert!(dir.path().join("traces/sphere_D4_run0.csv").is_file());
}

#[test]
fn run_without_an_output_directory_is_a_usage_error() {
    let output = spadepso(&["run", "--problem", "sphere", "--dim", "4"]);
    assert_eq!(output.status.code(), Some(2), "stderr: {}", stderr(&output));
    assert!(stderr(&output).contains("out"), "{}", stderr(&output));
}

#[test]
fn unknown_problem_ids_are_rejected_with_the_valid_list() {
    let dir = tempfile::tempdir().expect("tempdir");
    let output = spadepso(&[
        "run",
        "--problem",
        "warp-drive",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "stderr: {}", stderr(&output));
    let text = stderr(&output);
    assert!(text.contains("warp-drive"), "{text}");
    assert!(text.contains("ssrp"), "expected the valid-id list: {text}");
}

#[test]
fn config_files_combine_with_set_overrides() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("results");
    let config = dir.path().join("experiment.conf");
    std::fs::write(
        &config,
        format!(
            "optimizer = spade\nproblems = sphere\ndimension = 4\nruns = 2\n\
             budget = 9999\nout_dir = {}\n",
            out.display()
        ),
    )
    .expect("write config");

    let output = spadepso(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "budget=1500",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("budget 1500"), "{}", stdout(&output));
    assert!(out.join("report.json").is_file());

    let bad = spadepso(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "wobble=1",
    ]);
    assert_eq!(bad.status.code(), Some(2), "stderr: {}", stderr(&bad));
    assert!(stderr(&bad).contains("wobble"), "{}", stderr(&bad));
}

#[test]
fn compare_reports_side_by_side_and_as_csv() {
    let dir_a = tempfile::tempdir().expect("tempdir");
    let dir_b = tempfile::tempdir().expect("tempdir");
    assert!(run_small(dir_a.path(), "spade").status.success());
    assert!(run_small(dir_b.path(), "pso").status.success());
    let report_a = dir_a.path().join("report.json");
    let report_b = dir_b.path().join("report.json");

    let table = spadepso(&[
        "compare",
        "--a",
        report_a.to_str().unwrap(),
        "--b",
        report_b.to_str().unwrap(),
    ]);
    assert!(table.status.success(), "stderr: {}", stderr(&table));
    let text = stdout(&table);
    assert!(text.contains("sphere"), "{text}");
    assert!(text.contains("total vs"), "{text}");

    let csv = spadepso(&[
        "compare",
        "--a",
        report_a.to_str().unwrap(),
        "--b",
        report_b.to_str().unwrap(),
        "--csv",
    ]);
    assert!(csv.status.success());
    assert!(stdout(&csv).starts_with("problem,"), "{}", stdout(&csv));
}

#[test]
fn comparing_disjoint_problem_sets_is_a_usage_error() {
    let dir_a = tempfile::tempdir().expect("tempdir");
    let dir_b = tempfile::tempdir().expect("tempdir");
    assert!(run_small(dir_a.path(), "spade").status.success());
    let other = spadepso(&[
        "run",
        "--problem",
        "ssrp",
        "--runs",
        "2",
        "--budget",
        "1000",
        "--out",
        dir_b.path().to_str().unwrap(),
    ]);
    assert!(other.status.success(), "stderr: {}", stderr(&other));

    let output = spadepso(&[
        "compare",
        "--a",
        dir_a.path().join("report.json").to_str().unwrap(),
        "--b",
        dir_b.path().join("report.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2), "stderr: {}", stderr(&output));
    let text = stderr(&output);
    assert!(text.contains("sphere") && text.contains("ssrp"), "{text}");
}

#[test]
fn bad_flags_exit_with_the_usage_code() {
    let output = spadepso(&["run", "--no-such-flag"]);
    assert_eq!(output.status.code(), Some(2));
    let output = spadepso(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}
