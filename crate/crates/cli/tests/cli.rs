use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn latticeband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticeband"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn csv_rows(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn column_max(rows: &[Vec<f64>], col: usize) -> f64 {
    rows.iter().map(|r| r[col]).fold(f64::MIN, f64::max)
}

#[test]
fn chain_with_equal_springs_peaks_at_two_and_a_half() {
    let out = latticeband(&[
        "bands",
        "--builtin",
        "chain2n",
        "--path",
        "0:pi",
        "--samples",
        "101",
        "--set",
        "K1=1",
        "--set",
        "K2=1",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, "s,mu_1,omega_1");
    assert_eq!(rows.len(), 101);
    // The nearest of 101 samples sits 1.4e-3 from the peak at cos μ = -1/4.
    let mu = 58.0 * std::f64::consts::PI / 100.0;
    let sampled = (6.0 - 2.0 * mu.cos() - 4.0 * mu.cos().powi(2)).sqrt();
    assert!((column_max(&rows, 2) - sampled).abs() < 1e-12);
    assert!((column_max(&rows, 2) - 2.5).abs() < 1.5e-6);

    let fine = latticeband(&[
        "bands",
        "--builtin",
        "chain2n",
        "--path",
        "0:pi",
        "--samples",
        "2001",
        "--set",
        "K1=1",
        "--set",
        "K2=1",
    ]);
    let (_, rows) = csv_rows(&stdout(&fine));
    assert!((column_max(&rows, 2) - 2.5).abs() <= 1e-6);
}

#[test]
fn penta_path_has_three_hundred_one_rows() {
    let out = latticeband(&[
        "bands",
        "--builtin",
        "penta2d",
        "--path",
        "paper-2d-path",
        "--samples",
        "101",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header.split(',').count(), 8);
    assert_eq!(rows.len(), 301);
    assert!(rows.iter().all(|r| r.len() == 8));
}

#[test]
fn verify_penta_passes() {
    let out = latticeband(&["verify", "--builtin", "penta2d", "--cells", "5,5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["command"], "verify");
    assert_eq!(report["model"], "penta2d");
    assert_eq!(report["result"]["passed"], true);
    assert!(report["result"]["deviation"].as_f64().unwrap() <= 1e-8);
    assert!(report["tolerances"].is_object());
}

#[test]
fn unknown_builtin_is_a_usage_error() {
    let out = latticeband(&["bands", "--builtin", "hexagonal", "--path", "0:pi"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("mono1d"));
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_constant_is_a_usage_error() {
    let out = latticeband(&[
        "bands",
        "--builtin",
        "chain2n",
        "--path",
        "0:pi",
        "--set",
        "K99=1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("K99"));
}

#[test]
fn negative_override_is_rejected() {
    let out = latticeband(&[
        "bands",
        "--builtin",
        "chain2n",
        "--path",
        "0:pi",
        "--set",
        "K1=-1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_source_and_double_source_are_usage_errors() {
    assert_eq!(
        latticeband(&["bands", "--path", "0:pi"]).status.code(),
        Some(2)
    );
    let both = latticeband(&[
        "bands",
        "--builtin",
        "mono1d",
        "--model",
        "m.json",
        "--path",
        "0:pi",
    ]);
    assert_eq!(both.status.code(), Some(2));
    assert_eq!(
        latticeband(&["bands", "--builtin", "mono1d"]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_model_file_names_the_path() {
    let out = latticeband(&["validate", "--model", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/definitely/not/here.json"));
}

#[test]
fn malformed_json_fails_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\"name\": \"x\", \"dimension\": ").unwrap();
    let out = latticeband(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("malformed"));
}

#[test]
fn invalid_model_lists_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"name": "bad", "dimension": 1,
            "nodes": [{"id": "a", "mass": 0.0}],
            "springs": [{"a": "a", "b": "ghost", "offset": [1], "k": 1.0}]}"#,
    )
    .unwrap();
    let out = latticeband(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("NonPositiveMass"), "{err}");
    assert!(err.contains("UnknownNodeId"), "{err}");
}

#[test]
fn diatomic_model_file_reports_its_gap() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("diatomic.json");
    fs::write(
        &path,
        r#"{"name": "diatomic", "dimension": 1,
            "nodes": [{"id": "light", "mass": 1.0}, {"id": "heavy", "mass": 3.0}],
            "springs": [{"a": "light", "b": "heavy", "offset": [0], "k": 1.0},
                        {"a": "light", "b": "heavy", "offset": [-1], "k": 1.0}]}"#,
    )
    .unwrap();
    let out = latticeband(&[
        "gaps",
        "--model",
        path.to_str().unwrap(),
        "--resolution",
        "64",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let gaps = report["result"]["gaps"].as_array().unwrap();
    assert_eq!(gaps.len(), 1);
    assert!((gaps[0]["omega_low"].as_f64().unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-6);
    assert!((gaps[0]["omega_high"].as_f64().unwrap() - 2.0f64.sqrt()).abs() < 1e-6);

    // spring:<i> addresses springs of unlabeled models
    let stiff = latticeband(&[
        "gaps",
        "--model",
        path.to_str().unwrap(),
        "--set",
        "spring:1=4",
        "--set",
        "spring:2=4",
    ]);
    let report: Value = serde_json::from_str(&stdout(&stiff)).unwrap();
    let high = report["result"]["gaps"][0]["omega_high"].as_f64().unwrap();
    assert!((high - 8.0f64.sqrt()).abs() < 1e-6);
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let args = [
        "bands",
        "--builtin",
        "penta2d",
        "--path",
        "paper-2d-path",
        "--samples",
        "41",
    ];
    let first = latticeband(&args).stdout;
    assert_eq!(latticeband(&args).stdout, first);
    let single = Command::new(env!("CARGO_BIN_EXE_latticeband"))
        .args(args)
        .env("LATTICEBAND_THREADS", "1")
        .output()
        .unwrap();
    assert!(single.status.success());
    assert_eq!(single.stdout, first);
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bands.json");
    let out = latticeband(&[
        "bands",
        "--builtin",
        "mono1d",
        "--path",
        "0:pi",
        "--samples",
        "3",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["result"]["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn set_order_does_not_matter() {
    let a = latticeband(&[
        "bands",
        "--builtin",
        "trichain3",
        "--path",
        "0:pi",
        "--set",
        "K1=1.5",
        "--set",
        "m2=3",
    ]);
    let b = latticeband(&[
        "bands",
        "--builtin",
        "trichain3",
        "--path",
        "0:pi",
        "--set",
        "m2=3",
        "--set",
        "K1=1.5",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn count_and_extrema_reports() {
    let count = latticeband(&[
        "count",
        "--builtin",
        "chain2n",
        "--set",
        "K1=1",
        "--set",
        "K2=1",
        "--omega",
        "2.2",
    ]);
    let report: Value = serde_json::from_str(&stdout(&count)).unwrap();
    assert_eq!(report["result"]["count"], 2);

    let extrema = latticeband(&[
        "extrema",
        "--builtin",
        "mono1d",
        "--set",
        "K1=1",
        "--band",
        "1",
    ]);
    let report: Value = serde_json::from_str(&stdout(&extrema)).unwrap();
    assert!((report["result"]["max"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(report["result"]["max_on_boundary"], true);

    let bad = latticeband(&["extrema", "--builtin", "mono1d", "--band", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn surface_covers_the_grid() {
    let out = latticeband(&["surface", "--builtin", "penta2d", "--resolution", "16"]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert!(header.starts_with("s,mu_1,mu_2,omega_1"));
    assert_eq!(rows.len(), 256);
}

#[test]
fn builtin_list_names_all_models() {
    let out = latticeband(&["builtin-list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["mono1d", "chain2n", "trichain3", "penta2d"] {
        assert!(text.contains(name));
    }
}
