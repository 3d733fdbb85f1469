//! End-to-end behavior of the `nls` binary: subcommand plumbing, exit codes,
//! and output files.

use std::path::Path;
use std::process::{Command, Output};

fn nls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls")).args(args).output().expect("binary runs")
}

fn nls_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

/// Generates the noiseless two-subspace fixture, segments it, and checks the
/// predicted labels against the written ground truth through `eval`.
#[test]
fn segment_recovers_union_fixture_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls_in(
        dir.path(),
        &["synth", "union", "--min-angle-deg", "30", "--seed", "7", "-o", "."],
    );
    assert_exit(&out, 0);
    assert!(dir.path().join("points.csv").exists());
    assert!(dir.path().join("points.labels").exists());

    let out = nls_in(
        dir.path(),
        &[
            "segment",
            "points.csv",
            "--dim",
            "4",
            "--clusters",
            "2",
            "--rank",
            "8",
            "-o",
            "pred.labels",
            "--report",
            "report.json",
        ],
    );
    assert_exit(&out, 0);

    let out = nls_in(
        dir.path(),
        &["eval", "--pred", "pred.labels", "--truth", "points.labels"],
    );
    assert_exit(&out, 0);
    assert_eq!(stdout(&out).trim(), "0.00%");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    for key in ["sequence", "group", "motions", "error", "r", "T_d", "eta", "seed"] {
        assert!(report.get(key).is_some(), "report is missing '{key}'");
    }
    assert_eq!(report["r"], 8);
    assert_eq!(report["motions"], 2);
    assert_eq!(report["error"], 0.0);
}

#[test]
fn segment_prints_labels_when_no_output_path() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &nls_in(dir.path(), &["synth", "union", "--points", "10", "--seed", "3", "-o", "."]),
        0,
    );
    let out = nls_in(
        dir.path(),
        &["segment", "points.csv", "--clusters", "2", "--rank", "8"],
    );
    assert_exit(&out, 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 20);
    assert!(lines.iter().all(|l| l.parse::<usize>().is_ok()));
}

#[test]
fn too_few_neighbors_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(&nls_in(dir.path(), &["synth", "union", "--seed", "1", "-o", "."]), 0);
    let out = nls_in(
        dir.path(),
        &["segment", "points.csv", "--clusters", "2", "--neighbors", "2", "--dim", "4"],
    );
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("usage error"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty(), "diagnostics belong on stderr");
}

#[test]
fn unknown_flags_and_missing_args_exit_1() {
    assert_exit(&nls(&["segment", "--bogus"]), 1);
    assert_exit(&nls(&["segment"]), 1);
    assert_exit(&nls(&[]), 1);
    assert_exit(&nls(&["synth", "union", "--ambient", "not-a-number", "-o", "x"]), 1);
}

#[test]
fn help_and_version_exit_0() {
    let out = nls(&["--help"]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("segment"));
    assert_exit(&nls(&["--version"]), 0);
    assert_exit(&nls(&["segment", "--help"]), 0);
}

#[test]
fn malformed_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.csv"), "2,2\n1.0,huh\n3.0,4.0\n").unwrap();
    let out = nls_in(dir.path(), &["segment", "broken.csv", "--clusters", "2"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("data error"), "{}", stderr(&out));

    let out = nls_in(dir.path(), &["segment", "missing.csv", "--clusters", "2"]);
    assert_exit(&out, 2);
}

/// With k = N - 1 every local subspace is the same global underfit, all
/// residual distances tie, and the thresholded similarity has empty rows.
#[test]
fn collapsed_similarity_is_a_degenerate_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &nls_in(
            dir.path(),
            &[
                "synth", "union", "--ambient", "16", "--dim", "2", "--subspaces", "2",
                "--points", "8", "--min-angle-deg", "90", "--seed", "1", "-o", ".",
            ],
        ),
        0,
    );
    let out = nls_in(
        dir.path(),
        &[
            "segment", "points.csv", "--dim", "2", "--clusters", "2", "--neighbors", "15",
            "--rank", "4",
        ],
    );
    assert_exit(&out, 3);
    assert!(stderr(&out).contains("degenerate input"), "{}", stderr(&out));
}

#[test]
fn eval_rejects_mismatched_lengths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.labels"), "0\n1\n").unwrap();
    std::fs::write(dir.path().join("b.labels"), "0\n1\n0\n").unwrap();
    let out = nls_in(dir.path(), &["eval", "--pred", "a.labels", "--truth", "b.labels"]);
    assert_exit(&out, 2);
}

#[test]
fn infeasible_synth_spec_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls_in(
        dir.path(),
        &["synth", "union", "--ambient", "3", "--dim", "2", "--min-angle-deg", "30", "-o", "."],
    );
    assert_exit(&out, 1);
}

#[test]
fn synth_motion_writes_sequence_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls_in(
        dir.path(),
        &[
            "synth", "motion", "--frames", "12", "--objects", "2", "--points", "8",
            "--noise", "0.002", "--seed", "4", "-o", ".",
        ],
    );
    assert_exit(&out, 0);
    for name in ["seq.tracks", "seq.labels", "seq.meta"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let meta = std::fs::read_to_string(dir.path().join("seq.meta")).unwrap();
    assert_eq!(meta, "group=synthetic\nmotions=2\n");
}

/// A small benchmark directory: aggregation lines on stdout, schema-stable
/// JSON report, and motion filtering.
#[test]
fn bench_aggregates_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    for (name, objects, seed) in [("seq_a", "2", "11"), ("seq_b", "2", "12"), ("seq_c", "3", "13")]
    {
        let sub = dir.path().join(name);
        let out = nls_in(
            dir.path(),
            &[
                "synth", "motion", "--frames", "15", "--objects", objects, "--points", "8",
                "--noise", "0.001", "--seed", seed, "-o", sub.to_str().unwrap(),
            ],
        );
        assert_exit(&out, 0);
        for ext in ["tracks", "labels", "meta"] {
            std::fs::rename(sub.join(format!("seq.{ext}")), dir.path().join(format!("{name}.{ext}")))
                .unwrap();
        }
        std::fs::remove_dir(sub).unwrap();
    }

    let out = nls_in(
        dir.path(),
        &["bench", ".", "--report", "bench.json", "--sweep-k", "--check-reference"],
    );
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("synthetic: mean"), "{text}");
    assert!(text.contains("overall: mean"), "{text}");

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap())
            .unwrap();
    assert_eq!(report["sequences"].as_array().unwrap().len(), 3);
    assert_eq!(report["sequences"][0]["sequence"], "seq_a");
    assert_eq!(report["sequences"][2]["r"], 12, "three motions get rank 12 by default");
    assert!(report["aggregate"]["overall"]["count"].is_number());
    assert!(report["sweeps"]["neighbors"].is_array());
    assert!(report["reference_targets"]["two_motion"].is_number());
    assert!(report["reference_check"]["all_within_tolerance"].is_boolean());

    let out = nls_in(dir.path(), &["bench", ".", "--motions", "3", "--report", "three.json"]);
    assert_exit(&out, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("three.json")).unwrap())
            .unwrap();
    assert_eq!(report["sequences"].as_array().unwrap().len(), 1);
    assert_eq!(report["sequences"][0]["motions"], 3);
}

#[test]
fn bench_on_an_empty_directory_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nls_in(dir.path(), &["bench", "."]);
    assert_exit(&out, 2);
}

#[test]
fn invalid_thread_cap_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &nls_in(dir.path(), &["synth", "motion", "--frames", "10", "--points", "6", "-o", "."]),
        0,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_nls"))
        .current_dir(dir.path())
        .env("NLS_THREADS", "many")
        .args(["bench", "."])
        .output()
        .unwrap();
    assert_exit(&out, 1);
    assert!(stderr(&out).contains("NLS_THREADS"), "{}", stderr(&out));
}
