//! End-to-end tests of the `mergeset` binary: generate, replay, bench, and
//! the failure-path exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mergeset"))
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).expect("output file exists")
}

#[test]
fn gen_run_bench_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.trace");
    let csv = dir.path().join("t.csv");
    let base_csv = dir.path().join("b.csv");

    let status = bin()
        .args(["gen", "--kind", "interleave-merge", "--seed", "3"])
        .args(["--sets", "8", "--universe-bits", "12", "--ops", "400"])
        .arg("--out")
        .arg(&trace)
        .status()
        .unwrap();
    assert!(status.success());

    let out = bin()
        .arg("run")
        .arg(&trace)
        .args(["--oracle", "--check", "every-op"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ok: 400 ops"));

    for (cmd, path) in [("bench", &csv), ("baseline", &base_csv)] {
        let status = bin()
            .arg(cmd)
            .arg(&trace)
            .arg("--out")
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
        let text = read(path);
        assert!(text.starts_with("op_index,kind,u_g,work,phi_before,phi_after\n"));
        assert!(text.lines().last().unwrap().starts_with("# summary "));
        // Header + one row per op + summary.
        assert_eq!(text.lines().count(), 1 + 400 + 1);
    }

    // Identical replays count identical work.
    let again = dir.path().join("again.csv");
    let status = bin()
        .arg("bench")
        .arg(&trace)
        .arg("--out")
        .arg(&again)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&csv), read(&again));
}

#[test]
fn empty_trace_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("empty.trace");
    let csv = dir.path().join("empty.csv");
    fs::write(&trace, "# nothing but comments\n\n").unwrap();
    let status = bin()
        .arg("bench")
        .arg(&trace)
        .arg("--out")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(read(&csv), "op_index,kind,u_g,work,phi_before,phi_after\n");
}

#[test]
fn search_results_are_printed() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("s.trace");
    fs::write(
        &trace,
        "makeset 5\nmakeset 9\nmerge 1 2\nsearch 3 7\nsearch 3 2\n",
    )
    .unwrap();
    let out = bin()
        .arg("run")
        .arg(&trace)
        .arg("--oracle")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("search @3 -> 5"));
    assert!(stdout.contains("search @4 -> none"));
}

#[test]
fn malformed_trace_reports_line_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("bad.trace");
    fs::write(&trace, "makeset 1\nsplit 1\n").unwrap();
    let out = bin().arg("run").arg(&trace).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn engine_error_exits_nonzero_with_op_index() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("dead.trace");
    fs::write(&trace, "makeset 1\nsearch 7 0\n").unwrap();
    let out = bin().arg("run").arg(&trace).output().unwrap();
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("op 1"), "stderr: {stderr}");
    assert!(stderr.contains("unknown set id 7"), "stderr: {stderr}");
}
