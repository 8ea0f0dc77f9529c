//! Round-trip and format checks for experiment artifacts: config parsing,
//! provenance hashing, report files on disk, and report comparison.

use spadepso::harness::{
    compare, load_report, run_experiment, write_report, ExperimentConfig,
};
use spadepso::optimizer::{OptimizerId, TraceRecord};
use std::fs;

fn small_config(optimizer: OptimizerId) -> ExperimentConfig {
    ExperimentConfig {
        optimizer,
        problems: vec!["sphere".into()],
        dimension: Some(4),
        runs: 6,
        base_seed: 3,
        budget: Some(2_000),
        ..ExperimentConfig::default()
    }
}

#[test]
fn report_written_to_disk_reads_back_equal() {
    let dir = tempfile::tempdir().expect("tempdir");
    let report = run_experiment(&small_config(OptimizerId::Spade)).expect("runs");
    write_report(&report, dir.path()).expect("writes");

    let loaded = load_report(&dir.path().join("report.json")).expect("loads");
    assert_eq!(loaded, report.file);

    let summary = fs::read_to_string(dir.path().join("summary.csv")).expect("summary exists");
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("problem,dimension,budget,runs,best,mean,std_dev")
    );
    let data: Vec<&str> = lines.collect();
    assert_eq!(data.len(), 1, "one problem, one data row");
    assert!(data[0].starts_with("sphere,4,2000,6,"));

    // One trace CSV per run, each led by the standard header.
    let trace_dir = dir.path().join("traces");
    for k in 0..6 {
        let path = trace_dir.join(format!("sphere_D4_run{k}.csv"));
        let text = fs::read_to_string(&path).expect("trace exists");
        assert_eq!(text.lines().next(), Some(TraceRecord::CSV_HEADER));
        assert!(text.lines().count() > 1, "trace has at least one record");
    }
}

#[test]
fn rewriting_a_report_is_byte_stable() {
    let dir = tempfile::tempdir().expect("tempdir");
    let report = run_experiment(&small_config(OptimizerId::Spade)).expect("runs");
    write_report(&report, dir.path()).expect("first write");
    let first = fs::read(dir.path().join("report.json")).expect("read");
    write_report(&report, dir.path()).expect("second write");
    let second = fs::read(dir.path().join("report.json")).expect("read");
    assert_eq!(first, second);
}

#[test]
fn provenance_hash_tracks_result_relevant_keys_only() {
    let mut config = small_config(OptimizerId::Spade);
    let base_hash = config.config_hash();

    // The output directory does not affect results, so it is not hashed.
    config.set("out_dir", "/tmp/somewhere-else").expect("valid key");
    assert_eq!(config.config_hash(), base_hash);

    // The seed does.
    config.set("seed", "99").expect("valid key");
    assert_ne!(config.config_hash(), base_hash);
}

#[test]
fn config_file_round_trip_and_overrides() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("experiment.conf");
    fs::write(
        &path,
        "optimizer = spade\nproblems = sphere, ssrp\ndimension = 4\n\
         runs = 2\nbudget = 1500\nbudget = 2500\n",
    )
    .expect("write config");

    let mut config = ExperimentConfig::from_file(&path).expect("parses");
    assert_eq!(config.problems, vec!["sphere", "ssrp"]);
    assert_eq!(config.budget, Some(2_500), "later assignments win");

    // CLI-style overrides replace file values.
    config.set("runs", "4").expect("valid key");
    assert_eq!(config.runs, 4);

    let err = match config.set("wobble", "1") {
        Err(e) => e,
        Ok(()) => panic!("unknown keys must be rejected"),
    };
    assert!(err.is_usage(), "unknown key is a usage error: {err}");
    assert!(err.to_string().contains("wobble"));
}

#[test]
fn comparing_a_report_with_itself_is_all_ties() {
    let report = run_experiment(&small_config(OptimizerId::Spade)).expect("runs");
    let cmp = compare(&report.file, &report.file).expect("same problem set");
    assert_eq!(cmp.verdict.wins, 0);
    assert_eq!(cmp.verdict.losses, 0);
    assert_eq!(cmp.verdict.ties, 1);
    let wilcoxon = cmp.rows[0].wilcoxon.as_ref().expect("6 paired runs");
    assert_eq!(wilcoxon.p_value, 1.0, "identical samples carry no signal");
}

#[test]
fn comparing_different_optimizers_produces_a_full_table() {
    let ours = run_experiment(&small_config(OptimizerId::Spade)).expect("runs");
    let base = run_experiment(&small_config(OptimizerId::Pso)).expect("runs");
    let cmp = compare(&ours.file, &base.file).expect("same problem set");
    assert_eq!(cmp.rows.len(), 1);
    assert!(cmp.rows[0].wilcoxon.is_some());

    let csv = cmp.to_csv();
    assert!(csv.lines().next().unwrap().starts_with("problem,"));
    assert_eq!(csv.lines().count(), 2);

    let text = format!("{cmp}");
    assert!(text.contains("sphere"), "table names the problem: {text}");
    assert!(text.contains("total vs"), "footer sums the verdict: {text}");
}

#[test]
fn mismatched_problem_sets_are_rejected() {
    let ours = run_experiment(&small_config(OptimizerId::Spade)).expect("runs");
    let mut other_config = small_config(OptimizerId::Pso);
    other_config.problems = vec!["ssrp".into()];
    other_config.dimension = Some(8);
    let other = run_experiment(&other_config).expect("runs");
    let err = match compare(&ours.file, &other.file) {
        Err(e) => e,
        Ok(_) => panic!("differing problem sets must not compare"),
    };
    assert!(err.is_usage());
    let message = err.to_string();
    assert!(message.contains("sphere") && message.contains("ssrp"), "{message}");
}
