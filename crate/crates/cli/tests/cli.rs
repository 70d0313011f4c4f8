use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hgld::{Gld, GldParams};

fn hgld(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgld"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_column(path: &Path, name: &str, values: &[f64]) {
    let mut body = format!("{name}\n");
    for v in values {
        body.push_str(&format!("{v}\n"));
    }
    fs::write(path, body).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fit_hurdle_reports_zero_share() {
    let dir = tempfile::tempdir().unwrap();
    let g = Gld::new(GldParams::rs(5.0, 0.2, 0.15, 0.15)).unwrap();
    let mut y = vec![0.0; 40];
    y.extend((0..60).map(|i| g.quantile((i as f64 + 0.5) / 60.0).unwrap()));
    let input = dir.path().join("y.csv");
    write_column(&input, "y", &y);
    let out = dir.path().join("out");
    let o = hgld(&[
        "fit-hurdle",
        "--input", input.to_str().unwrap(),
        "--response", "y",
        "--parametrization", "rs",
        "--candidates", "2000",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("result.json"));
    assert_eq!(r["lambda0"].as_f64().unwrap(), 0.4);
    assert_eq!(r["zero_count"].as_u64().unwrap(), 40);
    for f in ["rs_density.csv", "rs_qq.csv", "histogram.csv", "manifest.json", "timing.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["rows_used"].as_u64().unwrap(), 100);
    assert_eq!(m["seed"].as_u64().unwrap(), 1);
}

#[test]
fn truncation_and_log_apply_before_fitting() {
    let dir = tempfile::tempdir().unwrap();
    let mut y: Vec<f64> = (0..30).map(|i| 150.0 + 10.0 * i as f64).collect();
    y.extend([20.0, 50.0, 99.0, 100.0]);
    let input = dir.path().join("y.csv");
    write_column(&input, "cost", &y);
    let out = dir.path().join("out");
    let o = hgld(&[
        "fit-gpd",
        "--input", input.to_str().unwrap(),
        "--response", "cost",
        "--truncate", "100",
        "--log",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out.join("result.json"));
    assert_eq!(r["zero_count"].as_u64().unwrap(), 3);
    let fit = &r["fits"][0];
    assert!(fit["threshold_default"].as_bool().unwrap());
    assert_eq!(fit["params"]["alpha"].as_f64().unwrap(), 100f64.ln());
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.csv");
    write_column(&input, "y", &[1.0, 2.0, 3.0]);
    let out = dir.path().join("out");
    let o = hgld(&["fit", "--input", input.to_str().unwrap(), "--response", "cost", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cost"));

    let o = hgld(&["fit", "--input", "/nonexistent.csv", "--response", "y", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    write_column(&input, "y", &[-1.0, 2.0, 3.0]);
    let o = hgld(&["fit", "--input", input.to_str().unwrap(), "--response", "y", "--log", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_replicate_simulation_flags_missing_se() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hgld(&[
        "simulate",
        "--scenario", "HRS-symmetric",
        "--sizes", "100",
        "--replicates", "1",
        "--candidates", "1000",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("simulation.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(6) == Some("NaN")), "{table}");
    let s = json(&out.join("simulation.json"));
    assert!(s["studies"][0]["coefficients"][0]["se"].is_null());
}

#[test]
fn unknown_scenario_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hgld(&["simulate", "--scenario", "HRS", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
