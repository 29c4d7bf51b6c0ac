//! End-to-end runs of the `epicast` binary on small synthetic inputs.

use std::fs;
use std::path::Path;
use std::process::Command;

use chrono::NaiveDate;
use epicast::series::HierarchicalPanel;
use epicast::UnivariateSeries;
use tempfile::TempDir;

fn epicast(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_epicast"))
        .args(args)
        .env("EPICAST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn write_series(dir: &Path, name: &str, values: Vec<f64>) -> String {
    let s = UnivariateSeries::new(name, NaiveDate::from_ymd_opt(2020, 5, 1).unwrap(), values).unwrap();
    let path = dir.join(format!("{name}.csv"));
    s.write_csv(fs::File::create(&path).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

const LIGHT: [&str; 4] = ["--repeats", "2", "--epochs", "30"];

#[test]
fn holt_forecast_continues_a_line() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "line", (0..30).map(|t| 5.0 + 2.0 * t as f64).collect());
    let out = dir.path().join("out");
    let o = epicast(&["forecast", "--input", &input, "--model", "holt", "--horizon", "7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out.join("forecast.csv"));
    assert_eq!(r.len(), 7);
    assert_eq!(r[0][0], "2020-05-31");
    for (h, row) in r.iter().enumerate() {
        let expect = 5.0 + 2.0 * (30 + h) as f64;
        let raw: f64 = row[1].parse().unwrap();
        let clamped: f64 = row[2].parse().unwrap();
        assert!((raw - expect).abs() < 1e-9 && (clamped - expect).abs() < 1e-9);
    }
}

#[test]
fn negative_forecasts_are_clamped_only_in_their_column() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "down", (0..30).map(|t| 60.0 - 2.0 * t as f64).collect());
    let out = dir.path().join("out");
    let o = epicast(&["forecast", "--input", &input, "--model", "holt", "--horizon", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let r = rows(&out.join("forecast.csv"));
    assert_eq!(r[2][1].parse::<f64>().unwrap().round(), -4.0);
    assert_eq!(r[2][2], "0");
}

#[test]
fn hybrid_forecast_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let input = write_series(
        dir.path(),
        "wave",
        (0..60).map(|t| 100.0 + 10.0 * (t as f64 / 4.0).sin() + t as f64).collect(),
    );
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let mut args = vec!["forecast", "--input", &input, "--model", "holt-wbann", "--seed", "7", "--out"];
        let out_s = out.to_string_lossy().into_owned();
        args.push(&out_s);
        args.extend(LIGHT);
        assert!(epicast(&args).status.success());
        outputs.push(fs::read(out.join("forecast.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

fn panel_file(dir: &Path, national: Vec<f64>, states: Vec<(&str, Vec<f64>)>) -> String {
    let d = NaiveDate::from_ymd_opt(2020, 5, 1).unwrap();
    let panel = HierarchicalPanel::new(
        UnivariateSeries::new("Nation", d, national).unwrap(),
        states
            .into_iter()
            .map(|(n, v)| UnivariateSeries::new(n, d, v).unwrap())
            .collect(),
    )
    .unwrap();
    let path = dir.join("panel.csv");
    panel.write_csv(fs::File::create(&path).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn consistent_panel_needs_no_correction() {
    let dir = TempDir::new().unwrap();
    let a: Vec<f64> = (0..30).map(|t| 10.0 + t as f64).collect();
    let b: Vec<f64> = (0..30).map(|t| 50.0 + 3.0 * t as f64).collect();
    let nat: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let input = panel_file(dir.path(), nat, vec![("A", a), ("B", b)]);
    let out = dir.path().join("out");
    let o = epicast(&["adjust", "--input", &input, "--model", "holt", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out.join("adjust.csv"));
    assert_eq!(r.len(), 3);
    assert_eq!(r[0][0], "Nation");
    assert_eq!(r[0][2], "");
    for row in &r {
        let (raw, adj): (f64, f64) = (row[1].parse().unwrap(), row[4].parse().unwrap());
        assert!((raw - adj).abs() < 1e-9, "{row:?}");
    }
}

#[test]
fn late_reporting_state_is_excluded_and_weights_renormalised() {
    let dir = TempDir::new().unwrap();
    let a: Vec<f64> = (0..30).map(|t| 10.0 + t as f64 + (t % 3) as f64).collect();
    let b: Vec<f64> = (0..30).map(|t| 50.0 + 3.0 * t as f64 - (t % 4) as f64).collect();
    let c: Vec<f64> = (0..30).map(|t| if t < 25 { 0.0 } else { 4.0 }).collect();
    let nat: Vec<f64> = (0..30).map(|t| a[t] + b[t] + c[t] + 5.0).collect();
    let input = panel_file(dir.path(), nat, vec![("A", a), ("B", b), ("C", c)]);
    let out = dir.path().join("out");
    let o = epicast(&["adjust", "--input", &input, "--model", "holt", "--weight-mode", "window(3)", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out.join("adjust.csv"));
    let names: Vec<&str> = r.iter().map(|row| row[0].as_str()).collect();
    assert_eq!(names, ["Nation", "A", "B"]);
    let w: f64 = r[1..].iter().map(|row| row[2].parse::<f64>().unwrap()).sum();
    assert!((w - 1.0).abs() < 1e-12);
    let ex = rows(&out.join("excluded.csv"));
    assert_eq!(ex.len(), 1);
    assert_eq!(ex[0][0], "C");
}

#[test]
fn failed_run_leaves_no_outputs() {
    let dir = TempDir::new().unwrap();
    let a: Vec<f64> = (0..30).map(|t| if t < 20 { 0.0 } else { 1.0 }).collect();
    let nat: Vec<f64> = a.iter().map(|v| v + 5.0).collect();
    let input = panel_file(dir.path(), nat, vec![("A", a.clone()), ("B", a)]);
    let out = dir.path().join("out");
    let o = epicast(&["adjust", "--input", &input, "--model", "holt", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("every state"));
    assert!(!out.join("adjust.csv").exists());
}

#[test]
fn monitor_single_model_dominates() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "lin", (0..40).map(|t| 3.0 * t as f64 + (t % 2) as f64).collect());
    let out = dir.path().join("out");
    let o = epicast(&["monitor", "--input", &input, "--model", "holt", "--svg", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d = rows(&out.join("dominance.csv"));
    assert_eq!(d, vec![vec!["holt".to_string(), "100".into(), "100".into()]]);
    // t = 40, k = 4: origins 21..=37
    assert_eq!(rows(&out.join("monitor.csv")).len(), 17);
    assert_eq!(rows(&out.join("timeline.csv")).len(), 17);
    assert!(fs::read_to_string(out.join("monitor.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn shelflife_and_r0_reports() {
    let dir = TempDir::new().unwrap();
    let input = write_series(dir.path(), "flat", vec![250.0; 60]);
    let out = dir.path().join("out");
    let o = epicast(&[
        "shelflife", "--input", &input, "--model", "holt", "--train-len", "30", "--test-len", "30",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let txt = fs::read_to_string(out.join("shelflife.txt")).unwrap();
    assert!(txt.contains("shelf_days: unbounded"), "{txt}");
    assert_eq!(rows(&out.join("ape.csv")).len(), 30);

    let o = epicast(&["r0", "--input", &input, "--method", "growth", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out.join("r0.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][..3], ["flat", "growth", "1"]);
}

#[test]
fn bad_input_fails_with_message() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "date,value\n2020-01-01,1\n2020-01-03,2\n").unwrap();
    let o = epicast(&["forecast", "--input", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("2020-01-02"), "{err}");
    assert!(!dir.path().join("forecast.csv").exists());
}
