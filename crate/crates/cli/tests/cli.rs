use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bo3_core::TorusGrid;
use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn bo3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bo3")).args(args).output().expect("spawn bo3")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn assert_golden(args: &[&str], file: &str) {
    let out = bo3(args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), fs::read_to_string(golden(file)).unwrap());
}

#[test]
fn freq_example() {
    assert_golden(&["freq", "--actions", r#"{"1":1.0,"2":0.5}"#, "--k", "4", "--n", "1,2"], "freq_example.json");
}

#[test]
fn classify_example() {
    assert_golden(&["classify", "--p", "1", "--q", "2", "--gamma-p", "1.0"], "classify_example.json");
    assert_golden(&["classify", "--p", "1", "--q", "2", "--gamma-p", "9"], "classify_out_of_range.json");
}

#[test]
fn evolve_rejects_empty_support() {
    let empty = golden("empty.json");
    let out = bo3(&["evolve", "--gaps", empty.to_str().unwrap(), "--k", "4", "--t", "0:0.01:1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no support"), "{}", stderr(&out));
}

#[test]
fn evolve_rotates_phases_on_a_time_grid() {
    let out = bo3(&["evolve", "--gaps", r#"[{"n":1,"re":1.0,"im":0.0}]"#, "--t", "0:0.25:1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let records: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 5);
    // One gap with gamma = 1: omega^(4)_1 = 2.
    for r in records {
        let t = r["t"].as_f64().unwrap();
        let z = &r["gaps"][0];
        assert!((z["re"].as_f64().unwrap() - (2.0 * t).cos()).abs() < 1e-15);
        assert!((z["im"].as_f64().unwrap() - (2.0 * t).sin()).abs() < 1e-15);
    }
}

#[test]
fn malformed_input_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "[{\"n\": 1,\n \"re\": 1.0}]").unwrap();
    let out = bo3(&["evolve", "--gaps", bad.to_str().unwrap(), "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("missing field `im`") && err.contains("line 2"), "{err}");

    let out = bo3(&["freq", "--actions", r#"{"1": -1.0}"#]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let out = bo3(&["freq", "--actions", r#"{"1": 1.0}"#, "--n", "0..3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bo3(&["freq", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_sits_below_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"command": "freq", "actions": {"1": 1.0, "2": 0.5}, "k": 4, "n": "1,2"}"#).unwrap();
    let from_file = bo3(&["--config", cfg.to_str().unwrap(), "freq"]);
    assert_eq!(stdout(&from_file), fs::read_to_string(golden("freq_example.json")).unwrap());

    // k = 2 is translation: omega_n = n.
    let overridden = bo3(&["freq", "--config", cfg.to_str().unwrap(), "--k", "2"]);
    assert_eq!(stdout(&overridden), "[{\"n\":1,\"omega\":1.0},{\"n\":2,\"omega\":2.0}]\n");

    fs::write(&cfg, r#"{"actions": {"1": 1.0}, "kk": 4}"#).unwrap();
    let out = bo3(&["--config", cfg.to_str().unwrap(), "freq"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kk"));

    fs::write(&cfg, r#"{"command": "evolve"}"#).unwrap();
    assert_eq!(bo3(&["--config", cfg.to_str().unwrap(), "freq"]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["experiment", "illposed", "--kmax", "8"];
    let (a, b) = (bo3(&args), bo3(&args));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["kind"], "illposedness");
    assert_eq!(report["series"].as_array().unwrap().len(), 8);
    for key in ["kind", "parameters", "series", "verdict"] {
        assert!(report.get(key).is_some(), "{key}");
    }

    let threaded = Command::new(env!("CARGO_BIN_EXE_bo3")).args(args).env("BO3_THREADS", "1").output().unwrap();
    assert_eq!(threaded.stdout, a.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_bo3")).args(args).env("BO3_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn reconstruct_writes_a_loadable_grid() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("u.bo3g");
    let out = bo3(&[
        "reconstruct", "--p", "1", "--q", "2", "--gamma-p", "1.0", "--gamma-q", "0.5", "--n", "512", "--out",
        bin.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((summary["a"][0].as_f64().unwrap() - 0.23192505).abs() < 1e-7);
    assert!((summary["b"][0].as_f64().unwrap() - 0.48795004).abs() < 1e-7);
    let u = TorusGrid::load(&bin).unwrap();
    assert_eq!(u.size(), 512);

    let csv = dir.path().join("u.csv");
    let out = bo3(&["reconstruct", "--p", "1", "--gamma-p", "1.0", "--n", "64", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 65);
    assert!(text.starts_with("x,u\n0,"));

    // q = 3p is not a two-gap member of the family.
    let out = bo3(&["reconstruct", "--p", "1", "--q", "3", "--gamma-p", "1", "--gamma-q", "0.5", "--n", "64"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn pde_compare_reports_deviation_and_blow_up() {
    let dir = tempfile::tempdir().unwrap();
    let gaps = dir.path().join("g.json");
    fs::write(&gaps, r#"[{"n": 1, "re": 0.5, "im": 0.0}]"#).unwrap();
    let report = dir.path().join("r.json");
    let args = [
        "pde-compare", "--gaps", gaps.to_str().unwrap(), "--T", "0.02", "--N", "128", "--dt", "1e-4", "--snapshots", "2",
        "--report", report.to_str().unwrap(),
    ];
    let out = bo3(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["snapshots"].as_array().unwrap().len(), 3);
    assert!(r["max_deviation"].as_f64().unwrap() < 1e-9, "{r}");
    assert!(r["conservation"]["h2_drift"].as_f64().unwrap() < 1e-10, "{r}");
    // A one-gap potential is a traveling wave.
    assert!(r["traveling_wave_speed"].is_number());

    // A step far beyond the stability limit of the two-gap wave.
    fs::write(&gaps, r#"[{"n": 1, "re": 1.0, "im": 0.0}, {"n": 2, "re": 0.7071067811865476, "im": 0.0}]"#).unwrap();
    let out = bo3(&["pde-compare", "--gaps", gaps.to_str().unwrap(), "--T", "0.05", "--N", "256", "--dt", "1e-3"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("blow-up"));
}

#[test]
fn experiments_emit_reports() {
    let out = bo3(&["experiment", "threegap", "--lattice", "6"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["kind"], "three_gap_scan");
    assert_eq!(r["verdict"], "confirmed");

    let out = bo3(&["experiment", "weak", "--gaps", r#"[{"n":1,"re":1.0,"im":0.0}]"#, "--alpha", "1", "--kmax", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(r["kind"], "weak_discontinuity");

    let out = bo3(&["experiment", "weak", "--gaps", r#"[{"n":1,"re":1.0,"im":0.0}]"#, "--alpha", "6.283185307179586"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = bo3(&["experiment", "stability", "--t", "0:1:2", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("k,value_re,value_im\n"));
    assert_eq!(text.lines().count(), 4);
}
