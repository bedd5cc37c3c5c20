//! End-to-end tests of the command-line driver: artifacts, exit codes and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_atomap"))
}

fn benchmark(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../benchmarks")
        .join(name)
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn writes_program_and_metrics() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(benchmark("graph_20.qasm"))
        .args(["--hardware", "mixed", "--mode", "hybrid", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let metrics = read(out.path(), "metrics.txt");
    assert!(metrics.starts_with("mode = hybrid"), "{metrics}");
    assert!(metrics.contains("delta_CZ = "));
    let program = read(out.path(), "program.txt");
    assert!(program.lines().all(|l| l.starts_with("GATE") || l.starts_with("AOD_")));
    assert!(program.contains("GATE CZ"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for out in [a.path(), b.path()] {
        let status = bin()
            .args(["--circuit"])
            .arg(benchmark("rev_10.qasm"))
            .args(["--hardware", "mixed", "--mode", "hybrid", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(read(a.path(), "program.txt"), read(b.path(), "program.txt"));
    assert_eq!(read(a.path(), "metrics.txt"), read(b.path(), "metrics.txt"));
}

#[test]
fn parse_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.qasm");
    std::fs::write(&bad, "qreg q[2];\nswap q[0],q[1];\n").unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(&bad)
        .args(["--hardware", "mixed", "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn capacity_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let big = dir.path().join("big.qasm");
    std::fs::write(&big, "qreg q[300]; cz q[0],q[1];\n").unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(&big)
        .args(["--hardware", "mixed", "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn routing_failure_exits_4() {
    // rev_10 holds 4-qubit gates; its single-row initial layout has no
    // valid clique geometry, so gate-only mode cannot route it.
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(benchmark("rev_10.qasm"))
        .args(["--hardware", "mixed", "--mode", "gate-only", "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn hardware_accepts_config_files_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hw.cfg");
    std::fs::write(
        &cfg,
        "l = 6\nd = 3.0\nr_int = 2.0\nr_restr = 2.0\nF_cz = 0.99\nF_h = 0.999\nF_shuttle = 0.999\n\
         t_u3 = 0.5\nt_cz = 0.2\nt_ccz = 0.4\nt_cccz = 0.6\nv = 0.5\nt_act = 20\nt_deact = 20\n\
         T1 = 100000000\nT2 = 1500000\n",
    )
    .unwrap();
    let circuit = dir.path().join("c.qasm");
    std::fs::write(&circuit, "qreg q[4]; cz q[0],q[3];\n").unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(&circuit)
        .args(["--hardware"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert!(status.success());

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(&circuit)
        .args(["--hardware"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn sweep_writes_comparison_table() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(benchmark("graph_20.qasm"))
        .args(["--hardware", "mixed", "--mode", "hybrid", "--sweep", "0,1,inf", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let table = read(out.path(), "sweep.txt");
    assert!(table.contains("alpha"));
    assert!(table.contains("best = "));
    assert!(out.path().join("program.txt").exists());

    // Sweeping outside hybrid mode is a usage error.
    let status = bin()
        .args(["--circuit"])
        .arg(benchmark("graph_20.qasm"))
        .args(["--hardware", "mixed", "--mode", "gate-only", "--sweep", "0,1", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn table_report_format() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["--circuit"])
        .arg(benchmark("graph_20.qasm"))
        .args(["--hardware", "gate", "--mode", "gate-only", "--report-format", "table", "--out"])
        .arg(out.path())
        .status()
        .unwrap();
    assert!(status.success());
    let metrics = read(out.path(), "metrics.txt");
    assert!(metrics.contains("dCZ"), "{metrics}");
    assert!(metrics.contains("alpha"), "{metrics}");
}
