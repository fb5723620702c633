//! End-to-end exercises of the installed binary: artifact round trips,
//! byte-level determinism, restart equivalence, and the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axicyl::io::CSV_HEADER;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_axicyl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config_body(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let body = format!(
        "schema_version = 1\nnr = 16\nnz = 32\nt_end = 0.02\noutput_every = 4\n{extra}"
    );
    write_config_body(dir, &body)
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// Sorted list of checkpoint files under `dir/checkpoints`.
fn checkpoints(dir: &Path) -> Vec<PathBuf> {
    let mut found: Vec<PathBuf> = fs::read_dir(dir.join("checkpoints"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    found.sort();
    found
}

#[test]
fn simulate_then_report_produces_every_artifact() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "");
    let out_dir = tmp.path().join("run");

    let sim = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&sim), 0, "stderr: {}", stderr(&sim));
    for name in ["config.echo.txt", "diagnostics.csv", "summary.json", "manifest.json"] {
        assert!(out_dir.join(name).is_file(), "missing {name}");
    }
    assert!(!checkpoints(&out_dir).is_empty());

    let csv = String::from_utf8(read(&out_dir.join("diagnostics.csv"))).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert!(csv.lines().count() > 2, "expected several recorded rows");

    for format in ["csv", "json", "svg"] {
        let rep = run(&["report", "--in", out_dir.to_str().unwrap(), "--format", format]);
        assert_eq!(code(&rep), 0, "format {format}: {}", stderr(&rep));
    }
    for name in ["report.csv", "report.json", "x_t.svg", "ratio_vs_d.svg", "report_manifest.json"] {
        assert!(out_dir.join(name).is_file(), "missing {name}");
    }
    let table = String::from_utf8(read(&out_dir.join("report.csv"))).unwrap();
    assert!(table.contains("\nenergy,"));
    assert!(table.contains("\ndiv_residual_max,"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "seed = 7\n");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));

    for out_dir in [&a, &b] {
        let sim = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&sim), 0, "stderr: {}", stderr(&sim));
    }
    for name in ["diagnostics.csv", "summary.json", "config.echo.txt"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs");
    }
    let (ca, cb) = (checkpoints(&a), checkpoints(&b));
    assert_eq!(ca.len(), cb.len());
    assert_eq!(read(ca.last().unwrap()), read(cb.last().unwrap()));
}

#[test]
fn bench_bytes_do_not_depend_on_thread_count() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("t1"), tmp.path().join("tn"));
    let args = |dir: &Path| {
        vec![
            "bench".to_string(),
            "--suite".into(),
            "h2".into(),
            "--samples".into(),
            "3".into(),
            "--grids".into(),
            "16,24".into(),
            "--seed".into(),
            "11".into(),
            "--out".into(),
            dir.to_str().unwrap().to_string(),
        ]
    };
    let one = bin().args(args(&a)).env("AXICYL_THREADS", "1").output().unwrap();
    assert_eq!(code(&one), 0, "stderr: {}", stderr(&one));
    let many = bin().args(args(&b)).env("AXICYL_THREADS", "4").output().unwrap();
    assert_eq!(code(&many), 0, "stderr: {}", stderr(&many));
    for name in ["reports.json", "summary.csv"] {
        assert_eq!(read(&a.join(name)), read(&b.join(name)), "{name} differs");
    }
    let bad = bin()
        .args(args(&tmp.path().join("t0")))
        .env("AXICYL_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2, "thread count 0 must be a config error");
}

#[test]
fn restart_reproduces_the_unbroken_trajectory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config_body(
        tmp.path(),
        "schema_version = 1\nnr = 16\nnz = 32\nt_end = 0.02\noutput_every = 3\n",
    );
    let full = tmp.path().join("full");
    let sim = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        full.to_str().unwrap(),
    ]);
    assert_eq!(code(&sim), 0, "stderr: {}", stderr(&sim));

    let points = checkpoints(&full);
    assert!(points.len() >= 3, "need a mid-run checkpoint, got {}", points.len());
    let mid = &points[points.len() / 2];

    let resumed = tmp.path().join("resumed");
    let res = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        resumed.to_str().unwrap(),
        "--restart",
        mid.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "stderr: {}", stderr(&res));

    // The stepper is a pure function of (u, Γ, t), so the resumed run's final
    // checkpoint must equal the unbroken run's byte for byte.
    let resumed_points = checkpoints(&resumed);
    assert_eq!(
        read(points.last().unwrap()),
        read(resumed_points.last().unwrap()),
        "final checkpoints diverged"
    );
}

#[test]
fn usage_and_config_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");

    let usage = run(&["simulate", "--config"]);
    assert_eq!(code(&usage), 2);

    let unknown = run(&["frobnicate"]);
    assert_eq!(code(&unknown), 2);

    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);

    let bad_key = tmp.path().join("bad.cfg");
    fs::write(&bad_key, "schema_version = 1\nwarp_factor = 9\n").unwrap();
    let sim = run(&[
        "simulate",
        "--config",
        bad_key.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&sim), 2);
    assert!(stderr(&sim).contains("error:"), "stderr: {}", stderr(&sim));

    let bench = run(&["bench", "--suite", "nope", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&bench), 2);

    let empty = run(&[
        "bench",
        "--suite",
        "h2",
        "--samples",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&empty), 2);
}

#[test]
fn diverging_runs_exit_3_and_leave_a_failure_manifest() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config_body(
        tmp.path(),
        "schema_version = 1\nnr = 16\nnz = 32\nt_end = 2000\noutput_every = 50\nfixed_dt = 10\n",
    );
    let out_dir = tmp.path().join("blowup");
    let sim = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&sim), 3, "stderr: {}", stderr(&sim));
    let failure = String::from_utf8(read(&out_dir.join("failure.json"))).unwrap();
    assert!(failure.contains("\"status\": \"failed\""));
}

#[test]
fn format_errors_exit_4() {
    let tmp = TempDir::new().unwrap();

    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let rep = run(&["report", "--in", empty.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&rep), 4, "stderr: {}", stderr(&rep));

    let cfg = write_config(tmp.path(), "");
    let corrupt = tmp.path().join("corrupt.ckpt");
    fs::write(&corrupt, b"AXICYL1\nnr 16\ntruncated").unwrap();
    let sim = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("out").to_str().unwrap(),
        "--restart",
        corrupt.to_str().unwrap(),
    ]);
    assert_eq!(code(&sim), 4, "stderr: {}", stderr(&sim));
}
