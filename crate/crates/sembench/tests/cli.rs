//! The installed binary's observable contract: exit codes, help text,
//! and file outputs.

use std::process::Command;

fn sembench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sembench"))
}

#[test]
fn help_exits_zero_and_names_all_subcommands() {
    let out = sembench().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["run", "sweep", "weak-scale", "verify"] {
        assert!(text.contains(sub), "--help is missing {sub}");
    }
}

#[test]
fn subcommand_help_documents_the_flags() {
    let out = sembench().args(["run", "--help"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--case",
        "--elems",
        "--order",
        "--variant",
        "--fusion",
        "--precision",
        "--partitions",
        "--steps",
        "--dt",
        "--scatter",
        "--seed",
        "--out",
        "--dump-mesh",
        "--dump-state",
    ] {
        assert!(text.contains(flag), "run --help is missing {flag}");
    }
    let sweep = sembench().args(["sweep", "--help"]).output().unwrap();
    let text = String::from_utf8(sweep.stdout).unwrap();
    assert!(text.contains("--reps"));
    assert!(text.contains("--out"));
}

#[test]
fn unknown_flags_exit_with_two() {
    let out = sembench().args(["run", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let bad_value = sembench()
        .args(["run", "--precision", "fp128"])
        .output()
        .unwrap();
    assert_eq!(bad_value.status.code(), Some(2));
    let bad_sub = sembench().arg("transmogrify").output().unwrap();
    assert_eq!(bad_sub.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_with_one_and_report_to_stderr() {
    let out = sembench()
        .args(["run", "--elems", "2,2,2", "--order", "2", "--partitions", "999"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "stderr was {err:?}");
}

#[test]
fn tiny_run_prints_a_human_summary() {
    let out = sembench()
        .args([
            "run",
            "--elems",
            "2,2,2",
            "--order",
            "2",
            "--steps",
            "1",
            "--warmup-steps",
            "0",
            "--workers",
            "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("GNOPS"), "missing throughput: {text}");
    assert!(text.contains("mass"), "missing diagnostics: {text}");
    assert!(text.contains("phases"), "missing phase breakdown: {text}");
}

#[test]
fn run_out_flag_writes_stats_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stats.json");
    let out = sembench()
        .args([
            "run",
            "--elems",
            "2,2,2",
            "--order",
            "2",
            "--steps",
            "1",
            "--warmup-steps",
            "0",
            "--workers",
            "1",
            "--out",
        ])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(stats["time_steps"], 1);
    assert_eq!(stats["rhs_evals"], 4);
    assert!(stats["runtime_ns"].as_u64().unwrap() > 0);
}

#[test]
fn sweep_writes_csv_and_aggregate_json_next_to_it() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("space.csv");
    let out = sembench()
        .args([
            "sweep",
            "--elems",
            "2,2,2",
            "--order",
            "2",
            "--variant",
            "base,reg",
            "--fusion",
            "unified",
            "--precision",
            "fp64",
            "--reps",
            "1",
            "--steps",
            "1",
            "--warmup-steps",
            "0",
            "--workers",
            "1",
            "--out",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("case,variant,fusion,precision,partitions,nodes,"));
    assert_eq!(text.lines().count(), 1 + 2, "one header plus two cells once each");
    let agg_path = dir.path().join("space.json");
    assert!(agg_path.exists(), "aggregates JSON missing");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("correctness gate: passed"), "stdout: {stdout}");
}

#[test]
fn verify_prints_one_line_per_check_and_exits_zero() {
    let out = sembench().args(["verify", "--seed", "5"]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let pass_lines = text.lines().filter(|l| l.starts_with("PASS ")).count();
    assert_eq!(pass_lines, 9, "expected nine checks: {text}");
    assert!(!text.contains("FAIL "), "unexpected failures: {text}");
    assert!(text.contains("9 of 9 checks passed"));
}
