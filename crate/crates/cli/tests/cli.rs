use std::path::PathBuf;
use std::process::{Command, Output};

use nonlocal_cli::{check_identities, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use nonlocal_core::calculus::{forward_difference, TestFunction};
use nonlocal_core::identities::Ops;
use nonlocal_core::Result;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn nonlocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonlocal"))
        .args(args)
        .output()
        .unwrap()
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn p_below_one_is_a_config_error() {
    let out = nonlocal(&["run", "--config", path_str(&data("bad_p.json")), "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p > 1"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_theorem_is_a_config_error() {
    let out = nonlocal(&[
        "run",
        "--config",
        path_str(&data("unknown_theorem.json")),
        "--no-timestamp",
    ]);
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
}

#[test]
fn missing_config_is_an_io_error() {
    let out = nonlocal(&["run", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
}

#[test]
fn run_writes_timestamped_csv_to_stdout() {
    let out = nonlocal(&["run", "--config", path_str(&data("small.json")), "--quick"]);
    assert_eq!(out.status.code(), Some(EXIT_PASS), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# generated "));
    assert!(lines.next().unwrap().starts_with("job_id,theorem,m,p,"));
    // 5 points and 1 summary row per job
    assert_eq!(lines.clone().count(), 12);
    assert!(lines.all(|l| l.split(',').count() == 14));
}

#[test]
fn json_report_parses() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = nonlocal(&[
        "run",
        "--config",
        path_str(&data("small.json")),
        "--format",
        "json",
        "--quick",
        "--no-timestamp",
        "--out",
        path_str(&path),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.get("generated").is_none());
    let jobs = v["jobs"].as_array().unwrap();
    assert_eq!(jobs.len(), 2);
    assert_eq!(jobs[0]["points"].as_array().unwrap().len(), 5);
    assert!(jobs[0]["bound"]["max_ratio"].as_f64().unwrap() > 0.0);
}

#[test]
fn fixed_worker_count_is_reproducible() {
    let run = |w: &str| {
        nonlocal(&[
            "run",
            "--config",
            path_str(&data("small.json")),
            "--quick",
            "--no-timestamp",
            "--workers",
            w,
        ])
        .stdout
    };
    let three = run("3");
    assert!(!three.is_empty());
    assert_eq!(three, run("3"));
}

#[test]
fn seed_changes_the_csv() {
    let run = |s: &str| {
        nonlocal(&[
            "run",
            "--config",
            path_str(&data("small.json")),
            "--quick",
            "--no-timestamp",
            "--seed",
            s,
        ])
        .stdout
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn check_identities_quick_passes() {
    let out = nonlocal(&["check-identities", "--quick", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
}

fn flipped_forward(f: &TestFunction, x: &[f64], h: &[f64], m: usize) -> Result<f64> {
    let base = forward_difference(f, x, h, m)?;
    let x1: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + b).collect();
    let sign = if (m + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(base - 2.0 * sign * m as f64 * f.eval(&x1))
}

#[test]
fn corrupted_operator_fails_identities() {
    let ops = Ops {
        forward: flipped_forward,
        ..Ops::default()
    };
    let mut buf = Vec::new();
    assert_eq!(check_identities(1, true, &ops, &mut buf), EXIT_FAIL);
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().any(|l| l.starts_with("duality") && l.contains("FAIL")));
}

#[test]
fn certify_default_families_pass() {
    let out = nonlocal(&["certify-mollifiers"]);
    assert_eq!(out.status.code(), Some(EXIT_PASS));
}

#[test]
fn broken_normalization_fails_certification() {
    let out = nonlocal(&[
        "certify-mollifiers",
        "--config",
        path_str(&data("broken_mollifier.json")),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_FAIL));
    assert!(String::from_utf8_lossy(&out.stdout).contains("normalization"));
}
