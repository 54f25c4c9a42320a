//! End-to-end checks of the `kcore` binary: exit codes, pipeline
//! closure (writer output feeds the matching reader), and output
//! determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kcore(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcore"))
        .args(args)
        .current_dir(dir)
        .env("KCORE_OUT_DIR", dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const EXAMPLE: &str = "1 2\n2 3\n2 4\n3 4\n3 5\n4 5\n5 6\n";

#[test]
fn decompose_prints_stats_and_writes_cores() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("example.txt");
    fs::write(&graph, EXAMPLE).unwrap();
    let out = kcore(dir.path(), &["decompose", "example.txt"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "6 7 2 1.67 2");
    let cores = fs::read_to_string(dir.path().join("example.cores")).unwrap();
    assert!(cores.starts_with("# nodes 6 edges 7 k_max 2\n"));
}

#[test]
fn decompose_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.txt"), "").unwrap();
    let out = kcore(dir.path(), &["decompose", "empty.txt"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0 0 0 0.00 0");
}

#[test]
fn gen_decompose_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = kcore(
        dir.path(),
        &["gen", "worstcase", "--nodes", "12", "-o", "w.txt"],
    );
    assert!(out.status.success());
    let out = kcore(dir.path(), &["decompose", "w.txt", "-o", "w.cores"]);
    assert!(out.status.success());
    // All twelve nodes have coreness 2; node 1 is the unique min-degree node.
    assert_eq!(stdout(&out).trim(), "12 21 2 2.00 1");
    let out = kcore(dir.path(), &["verify", "w.txt", "w.cores"]);
    assert!(out.status.success(), "verify failed: {out:?}");
}

#[test]
fn verify_rejects_tampered_file_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), EXAMPLE).unwrap();
    kcore(dir.path(), &["decompose", "g.txt", "-o", "g.cores"]);
    let tampered = fs::read_to_string(dir.path().join("g.cores"))
        .unwrap()
        .replace("1\t2", "1\t7");
    fs::write(dir.path().join("g.cores"), tampered).unwrap();
    let out = kcore(dir.path(), &["verify", "g.txt", "g.cores"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), EXAMPLE).unwrap();
    // --hosts without one2many.
    let out = kcore(dir.path(), &["simulate", "g.txt", "--hosts", "4"]);
    assert_eq!(out.status.code(), Some(1));
    // Unknown flag.
    let out = kcore(dir.path(), &["simulate", "g.txt", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = kcore(dir.path(), &["decompose", "nope.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_4_but_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    kcore(
        dir.path(),
        &["gen", "worstcase", "--nodes", "20", "-o", "w.txt"],
    );
    let out = kcore(
        dir.path(),
        &[
            "simulate",
            "w.txt",
            "--max-rounds",
            "3",
            "-o",
            "report.json",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(doc["run"]["converged"], false);
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), EXAMPLE).unwrap();
    let args = [
        "simulate",
        "g.txt",
        "--schedule",
        "random",
        "--reps",
        "5",
        "--trace",
        "trace.csv",
    ];
    let a = kcore(dir.path(), &args);
    let trace_a = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let b = kcore(dir.path(), &args);
    let trace_b = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(trace_a, trace_b);
    assert!(trace_a.starts_with("round,avg_error,max_error,messages\n"));
}

#[test]
fn simulate_one2many_reports_overhead_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    kcore(
        dir.path(),
        &[
            "gen", "random", "--nodes", "80", "--prob", "0.08", "--seed", "7", "-o", "g.txt",
        ],
    );
    let out = kcore(
        dir.path(),
        &[
            "simulate",
            "g.txt",
            "--mode",
            "one2many",
            "--hosts",
            "4",
            "--policy",
            "broadcast",
        ],
    );
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["run"]["overhead_per_node"].is_number());
    let agg = &doc["aggregate"];
    let (t_min, t_avg, t_max) = (
        agg["t_min"].as_u64().unwrap() as f64,
        agg["t_avg"].as_f64().unwrap(),
        agg["t_max"].as_u64().unwrap() as f64,
    );
    assert!(t_min <= t_avg && t_avg <= t_max);
}

#[test]
fn gen_roundtrips_through_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let piped = kcore(dir.path(), &["gen", "chain", "--nodes", "9"]);
    assert!(piped.status.success());
    fs::write(dir.path().join("c.txt"), piped.stdout).unwrap();
    let out = kcore(dir.path(), &["decompose", "c.txt"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "9 8 1 1.00 2");
}

#[test]
fn bounds_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), EXAMPLE).unwrap();
    let out = kcore(dir.path(), &["bounds", "g.txt"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["bound_b1"], 5);
    assert_eq!(doc["bound_corollary"], 5);
    assert_eq!(doc["all_satisfied"], true);
}
