//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use edgecurves::conductance::ConductanceReport;

const BIN: &str = env!("CARGO_BIN_EXE_edgecurves");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("EDGECURVES_WORKERS")
        .output()
        .expect("run binary")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "4", "8"] {
        let csv = path(dir.path(), &format!("c{w}.csv"));
        let json = path(dir.path(), &format!("c{w}.json"));
        let o = run(&[
            "--workers", w, "dispersion", "--b", "1", "--gamma", "0.7", "--xi", "-3:3:40", "--n-max", "2",
            "--csv", &csv, "--json", &json,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(&json).unwrap()));
    }
    assert!(outputs.windows(2).all(|p| p[0] == p[1]));

    // the environment variable is honoured and overridden by the flag
    let csv = path(dir.path(), "env.csv");
    let o = Command::new(BIN)
        .args(["dispersion", "--gamma", "0.7", "--xi", "-3:3:40", "--n-max", "2", "--csv", &csv])
        .env("EDGECURVES_WORKERS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), outputs[0].0);
}

#[test]
fn flat_band_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "flat.csv");
    let o = run(&["dispersion", "--b", "1", "--gamma", "0", "--xi", "-2:2:9", "--branches", "+1", "--csv", &csv]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,branch,lambda,dlambda_dxi"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[1], "+1");
        assert_eq!(f[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn conductance_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let json = path(dir.path(), "g.json");
    let o = run(&["conductance", "--b", "1", "--gamma", "inf", "--levels", "0", "--json", &json]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&json).unwrap();
    let reports: Vec<ConductanceReport> = serde_json::from_str(&text)
        .or_else(|_| serde_json::from_str::<ConductanceReport>(&text).map(|r| vec![r]))
        .unwrap();
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r.integer, 2);
    assert!((r.integral.unwrap() - 2.0).abs() < 1e-2);
}

#[test]
fn conductance_to_stdout_for_negative_field() {
    let o = run(&["conductance", "--b", "-1", "--gamma", "0", "--levels", "0", "--limits-only"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = if v.is_array() { &v[0] } else { &v };
    // charge conjugation maps (b, 0) to (-b, inf): -(n + 1)
    assert_eq!(first["integer"], -2);
    assert!(first["integral"].is_null());
}

#[test]
fn symmetry_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let json = path(dir.path(), "s.json");
    let o = run(&["symmetry-check", "--b", "-1", "--gamma", "2", "--xi", "0.3", "--n-max", "2", "--json", &json]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"passed\": true"));
}

#[test]
fn figure_outputs_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "z.csv");
    let svg = path(dir.path(), "z.svg");
    let o = run(&["zigzag", "--b", "1", "--xi", "-2:2:20", "--n-max", "2", "--csv", &csv, "--svg", &svg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let found: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(found.iter().any(|f| f.ends_with(".svg")), "{found:?}");
    assert!(found.iter().any(|f| f.ends_with(".csv")), "{found:?}");
    for f in found.iter().filter(|f| f.ends_with(".svg")) {
        let s = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn exit_codes() {
    // usage errors
    for args in [
        vec!["dispersion", "--b", "0", "--gamma", "1"],
        vec!["dispersion", "--gamma", "1", "--xi", "3:1:5"],
        vec!["conductance", "--gamma", "1"],
        vec!["conductance", "--gamma", "1", "--levels", "0", "--delta", "5"],
        vec!["no-such-command"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    // an unwritable destination is a run-time failure
    let o = run(&["dispersion", "--gamma", "1", "--xi", "0", "--csv", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_single_check() {
    let o = run(&["validate", "--only", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("PASS"));
}
