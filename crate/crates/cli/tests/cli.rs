use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kummer_secant::hierarchy::HierarchyState;
use kummer_secant::{PeriodMatrix, SecantConfiguration};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kummer-secant"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn scenario(dir: &TempDir, cmd: &str, seed: &str) -> PathBuf {
    let out = dir.path().join(format!("{cmd}-{seed}.json"));
    let o = run(&[cmd, "--seed", seed, "--output", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn fay_scenario_passes_secant_check() {
    let dir = TempDir::new().unwrap();
    let fay = scenario(&dir, "scenario-fay", "1");
    let report = dir.path().join("check.json");
    let o = run(&["secant-check", "--input", path_str(&fay), "--tol", "1e-7", "--output", path_str(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = read_json(&report);
    assert!(v["residual"].as_f64().unwrap() <= 1e-7);
    assert!(v["bilinear_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn missing_tau_file_is_input_error() {
    let o = run(&["theta", "--tau", "/nonexistent/tau.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("tau.json"));
}

#[test]
fn hierarchy_on_degenerate_seed_writes_four_rows() {
    let dir = TempDir::new().unwrap();
    let deg = scenario(&dir, "scenario-degenerate", "2");
    let out = dir.path().join("run.json");
    let o = run(&["hierarchy-run", "--input", path_str(&deg), "--order", "4", "--output", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("run.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["order", "residual", "rank"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), i + 1);
        assert!(row[1].parse::<f64>().unwrap() <= 1e-7);
    }
    let state: HierarchyState = serde_json::from_value(read_json(&out)).unwrap();
    assert!(state.succeeded());
}

#[test]
fn premise_check_on_degenerate_seed() {
    let dir = TempDir::new().unwrap();
    let deg = scenario(&dir, "scenario-degenerate", "4");
    let o = run(&["premise-check", "--input", path_str(&deg), "--tol", "1e-6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn malformed_json_names_the_field() {
    let dir = TempDir::new().unwrap();
    let fay = scenario(&dir, "scenario-fay", "1");
    let mut v = read_json(&fay);
    v["config"]["points"][1]["re"] = Value::String("oops".into());
    let bad = dir.path().join("bad.json");
    fs::write(&bad, v.to_string()).unwrap();
    let o = run(&["secant-check", "--input", path_str(&bad)]);
    assert_eq!(code(&o), 1);
    let msg = stderr(&o);
    assert!(msg.contains("bad.json") && msg.contains("config.points[1].re"), "{msg}");

    fs::write(&bad, "{ not json").unwrap();
    let o = run(&["secant-check", "--input", path_str(&bad)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn tolerance_failure_exits_2_and_still_writes_report() {
    let dir = TempDir::new().unwrap();
    let fay = scenario(&dir, "scenario-fay", "1");
    let mut v = read_json(&fay);
    let re = v["config"]["zeta"]["re"][0].as_f64().unwrap();
    v["config"]["zeta"]["re"][0] = (re + 0.05).into();
    let moved = dir.path().join("moved.json");
    fs::write(&moved, v.to_string()).unwrap();
    let report = dir.path().join("report.json");
    let o = run(&["secant-check", "--input", path_str(&moved), "--output", path_str(&report)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(read_json(&report)["residual"].as_f64().unwrap() > 1e-8);
}

#[test]
fn propagation_finds_a_lift() {
    let dir = TempDir::new().unwrap();
    let fay = scenario(&dir, "scenario-fay", "3");
    let out = dir.path().join("prop.json");
    let o = run(&["secant-propagate", "--input", path_str(&fay), "--tol", "1e-7", "--output", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv::Reader::from_path(dir.path().join("prop.csv")).unwrap().records().count();
    assert_eq!(rows, 16);
    let next: SecantConfiguration = serde_json::from_value(read_json(&out)["config"].clone()).unwrap();
    assert_eq!(next.points.len(), 3);
}

#[test]
fn unknown_flag_is_an_error() {
    let o = run(&["theta", "--frobnicate"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--frobnicate"));
}

#[test]
fn invalid_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let fay = scenario(&dir, "scenario-fay", "1");
    let o = run(&["theta", "--input", path_str(&fay), "--eps", "1e-6", "--tol", "1e-8"]);
    assert_eq!(code(&o), 1);
    let o = run(&["hierarchy-run", "--input", path_str(&fay), "--order", "13"]);
    assert_eq!(code(&o), 1);
    let o = run(&["theta", "--input", path_str(&fay), "--samples", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn help_lists_every_flag() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for flag in ["--tau", "--input", "--eps", "--tol", "--seed", "--samples", "--order", "--lift", "--output"] {
        assert!(text.contains(flag), "{flag} missing from help");
    }
    for cmd in [
        "theta",
        "kummer",
        "secant-check",
        "secant-search",
        "secant-propagate",
        "involution",
        "hierarchy-run",
        "premise-check",
        "scenario-fay",
        "scenario-degenerate",
    ] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn identical_runs_give_identical_files() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        let deg = scenario(dir, "scenario-degenerate", "5");
        let out = dir.path().join("run.json");
        let o = run(&["hierarchy-run", "--input", path_str(&deg), "--order", "3", "--output", path_str(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for name in ["scenario-degenerate-5.json", "scenario-degenerate-5.csv", "run.json", "run.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn emitted_json_round_trips() {
    let dir = TempDir::new().unwrap();
    let fay = read_json(&scenario(&dir, "scenario-fay", "2"));
    let pm: PeriodMatrix = serde_json::from_value(fay["tau"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&pm).unwrap(), fay["tau"]);
    let cfg: SecantConfiguration = serde_json::from_value(fay["config"].clone()).unwrap();
    let again: SecantConfiguration =
        serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(serde_json::to_value(&cfg).unwrap(), fay["config"]);
}

#[test]
fn theta_and_kummer_from_tau() {
    let dir = TempDir::new().unwrap();
    let tau = dir.path().join("tau.json");
    fs::write(
        &tau,
        r#"{"g": 2, "tau_re": [[0.1, 0.2], [0.2, -0.3]], "tau_im": [[1.0, 0.3], [0.3, 1.1]]}"#,
    )
    .unwrap();
    let out = dir.path().join("theta.json");
    let o = run(&["theta", "--tau", path_str(&tau), "--samples", "5", "--output", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read_json(&out)["values"].as_array().unwrap().len(), 5);
    assert_eq!(csv::Reader::from_path(dir.path().join("theta.csv")).unwrap().records().count(), 5);

    let o = run(&["kummer", "--tau", path_str(&tau), "--samples", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
    assert_eq!(v["labels"].as_array().unwrap().len(), 4);
}

#[test]
fn involution_on_a_quadrisecant_configuration() {
    let dir = TempDir::new().unwrap();
    let tau = r#"{"g": 2, "tau_re": [[0.1, 0.2], [0.2, -0.3]], "tau_im": [[1.0, 0.3], [0.3, 1.1]]}"#;
    let point = |re: [f64; 2], im: [f64; 2]| format!(r#"{{"re": [{}, {}], "im": [{}, {}]}}"#, re[0], re[1], im[0], im[1]);
    let input = format!(
        r#"{{"tau": {tau}, "points": [{}, {}, {}, {}], "zeta_prime": {}}}"#,
        point([0.1, 0.2], [0.05, -0.1]),
        point([-0.3, 0.1], [0.2, 0.0]),
        point([0.25, -0.15], [-0.1, 0.3]),
        point([0.0, 0.4], [0.15, 0.1]),
        point([0.2, -0.05], [0.1, 0.2]),
    );
    let path = dir.path().join("inv.json");
    fs::write(&path, input).unwrap();
    for lift in ["0000", "1011"] {
        let o = run(&["involution", "--input", path_str(&path), "--lift", lift]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["discrepancy"].as_f64().unwrap() <= 1e-12);
        assert_eq!(v["b_points"].as_array().unwrap().len(), 4);
    }
    let o = run(&["involution", "--input", path_str(&path), "--lift", "012"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn secant_search_reports_non_secant_with_exit_2() {
    // three generic points translated by a generic zeta: the search either
    // stalls (exit 2) or lands on a trivial collision, never an input error
    let dir = TempDir::new().unwrap();
    let fay = read_json(&scenario(&dir, "scenario-fay", "1"));
    let mut v = fay.clone();
    v["config"]["points"][0]["re"][0] = (fay["config"]["points"][0]["re"][0].as_f64().unwrap() + 0.2).into();
    v["config"]["residual"] = Value::Null;
    v["config"]["alpha"] = Value::Null;
    let path = dir.path().join("search.json");
    fs::write(&path, v.to_string()).unwrap();
    let out = dir.path().join("found.json");
    let o = run(&["secant-search", "--input", path_str(&path), "--output", path_str(&out)]);
    assert!(matches!(code(&o), 0 | 2), "{}", stderr(&o));
    assert!(read_json(&out)["residual"].as_f64().is_some());
}
