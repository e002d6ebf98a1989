use std::process::{Command, Output};

use pinch_core::certify::CSV_COLUMNS;
use serde_json::Value;

fn pinch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinch"))
        .args(args)
        .env("PINCH_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn certify_prints_json() {
    let o = pinch(&["certify", "--dim", "3", "--budget", "64"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "pinch-cert/1");
    let c = &v["certificate"];
    assert_eq!(c["n"], 3);
    assert_eq!(c["passes"], true);
    assert_eq!(c["spectral_bound_holds"], false);
    assert!(c.get("runtime_ms").is_none());
}

#[test]
fn certify_writes_file_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let o = pinch(&[
            "certify",
            "--dim",
            "4",
            "--budget",
            "64",
            "--seed",
            "9",
            "--json",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("passes=true"));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn failing_certificate_exits_with_2() {
    let o = pinch(&["certify", "--dim", "4", "--h", "1", "--budget", "16"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["certificate"]["passes"], false);
}

#[test]
fn errors_exit_with_3() {
    assert_eq!(pinch(&["certify", "--dim", "1"]).status.code(), Some(3));
    assert_eq!(
        pinch(&["certify", "--dim", "4", "--h", "0"]).status.code(),
        Some(3)
    );
    assert_eq!(pinch(&["certify", "--nonsense"]).status.code(), Some(3));
    assert_eq!(pinch(&["table", "--dims", "1..3"]).status.code(), Some(3));
    assert_eq!(pinch(&["--help"]).status.code(), Some(0));
}

#[test]
fn table_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    let o = pinch(&[
        "table",
        "--dims",
        "2..5",
        "--even-only",
        "--budget",
        "32",
        "--csv",
        csv.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text, stdout(&o));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    let ns: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["2", "4"]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["certificates"].as_array().unwrap().len(), 2);
}

#[test]
fn roots_subcommand() {
    let o = pinch(&["roots", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let lm = v["spectrum"]["lambda_max"].as_f64().unwrap();
    assert!((lm - 0.481_211_825_059_603).abs() < 1e-12);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("x^4 + 3x^2 + 1"), "{err}");
    assert_eq!(
        pinch(&["roots", "--k", "2", "--sign", "-1"]).status.code(),
        Some(0)
    );
}

#[test]
fn curvature_subcommand() {
    let o = pinch(&["curvature", "--dim", "2", "--budget", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(
        v["curvature"]["max_abs"].as_f64().unwrap()
            <= v["curvature"]["analytic_bound"].as_f64().unwrap()
    );
}
