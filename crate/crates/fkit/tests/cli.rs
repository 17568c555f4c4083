//! End-to-end tests of the `fkit` binary: exit codes, JSON report shapes,
//! determinism under a fixed seed, and the cache/output plumbing.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fkit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|e| {
        panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

const WEDGE: &str = r#"{"n":1,"m":2,"special":false,"stars":[["b1","b2"]]}"#;

#[test]
fn weight_of_wedge_is_near_half() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let out = fkit(
        &[
            "weight", WEDGE, "--samples", "65536", "--seed", "11", "--cache",
            cache.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let val = v["value"].as_f64().unwrap();
    assert!((val - 0.5).abs() < 0.01, "wedge weight {val}");
    assert_eq!(v["exact"], Value::Bool(false));
    assert_eq!(v["samples"], 65536);
    assert!(cache.exists(), "cache file written");
}

#[test]
fn degree_mismatch_weight_is_exact_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    // one edge where 2n+m−2 = 2 are required
    let g = r#"{"n":1,"m":2,"special":false,"stars":[["b1"]]}"#;
    let out = fkit(&["weight", g, "--cache", cache.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["value"].as_f64().unwrap(), 0.0);
    assert_eq!(v["exact"], Value::Bool(true));
}

#[test]
fn shoikhet_weight_runs_for_special_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let g = r#"{"n":1,"m":1,"special":true,"stars":[["b1"],["v1"]]}"#;
    let out = fkit(
        &["weight", g, "--samples", "16384", "--cache", cache.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["exact"], Value::Bool(false));
    assert!(v["stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |cache: &Path| {
        fkit(
            &[
                "weight", WEDGE, "--samples", "16384", "--seed", "3", "--cache",
                cache.to_str().unwrap(),
            ],
            cache.parent().unwrap(),
        )
    };
    let a = run(&dir.path().join("a.ldjson"));
    let b = run(&dir.path().join("b.ldjson"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "fixed seed must reproduce bytes");
}

#[test]
fn weight_reads_graph_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wedge.json");
    std::fs::write(&path, WEDGE).unwrap();
    let cache = dir.path().join("w.ldjson");
    let out = fkit(
        &[
            "weight",
            path.to_str().unwrap(),
            "--samples",
            "16384",
            "--cache",
            cache.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!((stdout_json(&out)["value"].as_f64().unwrap() - 0.5).abs() < 0.02);
}

#[test]
fn star_commutator_matches_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let out = fkit(
        &[
            "star", "const2", "x1", "x2", "--order", "1", "--samples", "65536", "--cache",
            cache.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let coeffs = v["coefficients"].as_array().unwrap();
    assert_eq!(coeffs[0]["poly"], "x1*x2");
    // ħ¹ coefficient of x1 ⋆ x2 is the single wedge weight ≈ 1 for ∂₁∧∂₂
    let h1: f64 = coeffs[1]["poly"].as_str().unwrap().split('±').next().unwrap().parse().unwrap();
    assert!((h1 - 1.0).abs() < 2e-2, "h1 = {h1}");
}

#[test]
fn star_writes_csv_coefficient_table() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let csv = dir.path().join("table.csv");
    let out = fkit(
        &[
            "star", "const2", "x1", "x2", "--order", "1", "--samples", "16384", "--cache",
            cache.to_str().unwrap(), "--out", csv.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("k,monomial,value,stderr"));
    assert!(lines.next().unwrap().starts_with("0,x1*x2,1,"));
}

#[test]
fn csv_out_is_rejected_outside_star() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(
        &["duflo", "sl2", "x2", "--out", dir.path().join("t.csv").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "output");
    assert!(out.stdout.is_empty(), "no report before the usage error");
}

#[test]
fn star_accepts_poisson_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let pi = dir.path().join("pi.json");
    std::fs::write(&pi, r#"{"dim":2,"pi":[[1,2,"x1"]]}"#).unwrap();
    let cache = dir.path().join("w.ldjson");
    let out = fkit(
        &[
            "star",
            pi.to_str().unwrap(),
            "x1",
            "x2",
            "--order",
            "1",
            "--samples",
            "16384",
            "--cache",
            cache.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // {x1, x2} = x1 for π = x1·∂₁∧∂₂
    let v = stdout_json(&out);
    let h1 = v["coefficients"][1]["poly"].as_str().unwrap();
    assert!(h1.contains("x1"), "h1 = {h1}");
}

#[test]
fn invalid_poisson_component_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let pi = dir.path().join("pi.json");
    std::fs::write(&pi, r#"{"dim":2,"pi":[[2,1,"x1"]]}"#).unwrap();
    let out = fkit(&["star", pi.to_str().unwrap(), "x1", "x2"], dir.path());
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "poisson");
}

#[test]
fn duflo_abelian_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["duflo", "abelian", "x1^2"], dir.path());
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["duflo"], "x1^2");
    assert_eq!(v["exact"], Value::Bool(true));
}

#[test]
fn duflo_sl2_casimir_gains_constant_shift() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["duflo", "sl2", "x1*x3 + 1/4*x2^2"], dir.path());
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["duflo"], "1/4 + x1*x3 - 1/2*x2 + 1/4*x2^2");
}

#[test]
fn verify_duflo_sl2_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let out =
        fkit(&["verify", "duflo", "sl2", "--cache", cache.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["suite"], "duflo");
}

#[test]
fn verify_angles_passes_without_cache_io() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let out = fkit(&["verify", "angles", "--cache", cache.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["passed"], Value::Bool(true));
}

#[test]
fn unknown_algebra_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["verify", "duflo", "e8"], dir.path());
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "formality");
}

#[test]
fn unknown_suite_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["verify", "knots"], dir.path());
    assert_eq!(code(&out), 2);
    let v = stderr_json(&out);
    assert_eq!(v["error"], "suite");
    assert!(v["message"].as_str().unwrap().contains("duflo"));
}

#[test]
fn poisoned_cache_fails_verification_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    // An exact-flagged record with the wrong 1-fan weight must turn the
    // weight check red; the suite runner reports it and exits 4.
    std::fs::write(
        &cache,
        "{\"key\":\"K:1,1:b1\",\"value\":0.9,\"stderr\":0.0,\"samples\":1,\"seed\":7,\"exact\":true}\n",
    )
    .unwrap();
    let out = fkit(&["verify", "hkr", "--cache", cache.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 4);
    assert_eq!(stdout_json(&out)["passed"], Value::Bool(false));
    let diag = stderr_json(&out);
    assert_eq!(diag["error"], "verification");
    assert!(diag["message"].as_str().unwrap().contains("fan-1"));
}

#[test]
fn malformed_graph_json_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["weight", "{\"n\":1,"], dir.path());
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "graph");
}

#[test]
fn malformed_polynomial_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["star", "const2", "x1^", "x2"], dir.path());
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "polynomial");
}

#[test]
fn usage_errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["nosuchcmd"], dir.path());
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "usage");
}

#[test]
fn zero_samples_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["weight", WEDGE, "--samples", "0"], dir.path());
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "config");
}

#[test]
fn help_prints_to_stdout_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkit(&["--help"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Usage:"));
    assert!(out.stderr.is_empty());
}

#[test]
fn out_flag_mirrors_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let report = dir.path().join("report.json");
    let out = fkit(
        &[
            "weight", WEDGE, "--samples", "16384", "--cache", cache.to_str().unwrap(), "--out",
            report.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let mirrored = std::fs::read(&report).unwrap();
    assert_eq!(mirrored, out.stdout, "--out mirrors stdout bytes");
}

#[test]
fn jobs_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let out = fkit(
        &[
            "weight", WEDGE, "--samples", "16384", "--jobs", "2", "--cache",
            cache.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn cache_reuse_is_a_hit_on_second_run() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("w.ldjson");
    let args = [
        "weight", WEDGE, "--samples", "16384", "--seed", "5", "--cache",
        cache.to_str().unwrap(),
    ];
    let first = fkit(&args, dir.path());
    let before = std::fs::read_to_string(&cache).unwrap();
    let second = fkit(&args, dir.path());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(before, std::fs::read_to_string(&cache).unwrap(), "cache is stable");
}
