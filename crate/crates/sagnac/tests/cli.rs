use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sagnac::io::{write_series, Provenance};
use sagnac_core::signal::{Polarity, PolarizationSeries, SeriesRow};
use serde_json::Value;

fn sagnac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sagnac"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Vec<PathBuf> {
    let out = sagnac(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().lines().map(PathBuf::from).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(sagnac(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(sagnac(&[]).status.code(), Some(2));
    assert_eq!(sagnac(&["--format", "xml", "predict"]).status.code(), Some(2));
}

#[test]
fn config_and_input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    // simulate needs a seed
    assert_eq!(sagnac(&["--out", out, "simulate"]).status.code(), Some(2));
    assert_eq!(sagnac(&["--config", "/nonexistent/run.json", "predict"]).status.code(), Some(2));

    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"simulation": {"seed": 1, "colour": "red"}}"#).unwrap();
    assert_eq!(sagnac(&["--config", s(&cfg), "predict"]).status.code(), Some(2));

    fs::write(&cfg, r#"{"inputs": {"plus": "missing.csv"}}"#).unwrap();
    assert_eq!(sagnac(&["--config", s(&cfg), "fit"]).status.code(), Some(2));
}

#[test]
fn analysis_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let rows = (0..5).map(|i| SeriesRow::new(4.0 + i as f64, 0.01 * i as f64, 1e-4)).collect();
    let series = PolarizationSeries::derived(rows, Polarity::Positive).unwrap();
    write_series(&dir.path().join("plus.csv"), &Provenance::new("0", None), &series).unwrap();
    let out = sagnac(&["--out", s(dir.path()), "fit"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stderr.is_empty());
}

#[test]
fn predict_reports_the_default_chain() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["--out", s(dir.path()), "predict"]);
    let v = json(&dir.path().join("predict.json"));
    let a2 = v["a2_per_ang2"].as_f64().unwrap();
    assert!((a2 / -1.15e-3 - 1.0).abs() < 1e-9, "{a2}");
    let c_oam = v["c_oam_per_ang"].as_f64().unwrap();
    assert!((c_oam / -8.62e3 - 1.0).abs() < 0.01, "{c_oam}");
    assert_eq!(v["provenance"]["tool"], "sagnac");
}

#[test]
fn csv_summaries_are_flat() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["--out", s(dir.path()), "--format", "csv", "predict"]);
    let text = fs::read_to_string(dir.path().join("predict.csv")).unwrap();
    assert!(text.starts_with("# tool: sagnac"));
    assert!(text.lines().any(|l| l.starts_with("a2_per_ang2,")));
}

#[test]
fn table_report_reproduces_the_corrected_chain() {
    let dir = tempfile::tempdir().unwrap();
    let config = data("table_report.json");
    run_ok(&["--config", s(&config), "--out", s(dir.path()), "report"]);
    let v = json(&dir.path().join("report.json"));
    let get = |k: &str| (v[k]["value"].as_f64().unwrap(), v[k]["error"].as_f64().unwrap());
    let (a2, err) = get("combined_a2_per_ang2");
    assert!((a2 * 1e3 + 1.083).abs() <= 1e-3 && (err * 1e3 - 0.078).abs() <= 1e-3);
    let (slope, slope_err) = get("ell_slope_per_ang");
    assert!((slope.abs() - 4098.0).abs() <= 1.0 && (slope_err - 295.0).abs() <= 1.0);
    assert_eq!(v["error_convention_caveat"]["flagged"], true);
    assert_eq!(v["consistency"], "recomputed");
    let corrected: Vec<f64> = v["polarities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["corrected_a2_per_ang2"]["value"].as_f64().unwrap() * 1e3)
        .collect();
    assert!((corrected[0] + 1.117).abs() <= 1e-3 && (corrected[1] - 1.049).abs() <= 1e-3, "{corrected:?}");
}

fn pipeline(dir: &Path) -> Vec<PathBuf> {
    let config = dir.join("run.json");
    fs::write(&config, r#"{"simulation": {"seed": 2024, "n_pulses": 500}}"#).unwrap();
    let mut files = Vec::new();
    for cmd in ["simulate", "calibrate", "fit", "report"] {
        files.extend(run_ok(&["--config", s(&config), "--out", s(dir), cmd]));
    }
    files
}

#[test]
fn pipeline_is_bit_reproducible_and_stamped() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    assert_eq!(first.len(), second.len());
    for (x, y) in first.iter().zip(&second) {
        assert_eq!(x.file_name(), y.file_name());
        let (bx, by) = (fs::read(x).unwrap(), fs::read(y).unwrap());
        assert!(bx == by, "{} differs between runs", x.display());
        let text = String::from_utf8(bx).unwrap();
        match x.extension().and_then(|e| e.to_str()) {
            Some("csv") => assert!(text.starts_with("# tool: sagnac "), "{}", x.display()),
            Some("json") => {
                let v: Value = serde_json::from_str(&text).unwrap();
                assert_eq!(v["provenance"]["tool"], "sagnac", "{}", x.display());
                assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
            }
            other => panic!("unexpected output type {other:?}"),
        }
    }
    let plus = fs::read_to_string(a.path().join("plus.csv")).unwrap();
    assert!(plus.lines().any(|l| l.starts_with("# seed: ")));

    let injected = json(&a.path().join("simulate.json"))["a2_sagnac_per_ang2"].as_f64().unwrap();
    let report = json(&a.path().join("report.json"));
    let a2 = report["combined_a2_per_ang2"]["value"].as_f64().unwrap();
    let err = report["combined_a2_per_ang2"]["error"].as_f64().unwrap();
    assert!((a2 - injected).abs() < 4.0 * err, "{a2} +/- {err} vs {injected}");
}
