use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use smoothk::export::load_boundary;

fn smoothk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothk")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let o = smoothk(&["validate", "--case", "B", "--lambda", "0.5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["n_min"], 1);

    let o = smoothk(&["validate", "--case", "C", "--lambda", "0.9"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["n_min"], 2);
    assert_eq!(v["first_failure"]["index"], 1);

    assert_eq!(code(&smoothk(&["validate", "--case", "B", "--lambda", "1.2"])), 64);

    let o = smoothk(&["validate", "--case", "C", "--lambda", "0.99999"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("fails at n = 1"));
}

#[test]
fn usage_errors() {
    assert_eq!(code(&smoothk(&["verify", "--lemma", "no-such-lemma", "--case", "B"])), 64);
    assert_eq!(code(&smoothk(&["validate"])), 64);
    assert_eq!(code(&smoothk(&["validate", "--case", "A", "--lambda", "0.5"])), 64);
    assert_eq!(code(&smoothk(&["validate", "--case", "B", "--precision", "extended"])), 64);
    assert_eq!(code(&smoothk(&["frobnicate"])), 64);
    assert_eq!(code(&smoothk(&["--help"])), 0);
}

#[test]
fn construct_writes_loadable_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = smoothk(&["construct", "--case", "B", "--depth", "12", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(dir.path().join("boundary.json")).unwrap();
    let model = load_boundary(&text).unwrap();
    let again = smoothk::export::BoundaryDoc::from_model(&model).to_json().unwrap() + "\n";
    assert_eq!(again, text);

    let svg = std::fs::read_to_string(dir.path().join("boundary.svg")).unwrap();
    assert_eq!(svg.matches("class=\"arc\"").count(), model.arcs().count());
    assert_eq!(model.arcs().count(), 11);
    let quadrant = svg.split("<path id=\"quadrant\"").nth(1).unwrap();
    let path = quadrant.split("d=\"").nth(1).unwrap();
    assert!(path.starts_with("M 0 1 "));
    assert!(path.split('"').next().unwrap().ends_with(" L 1 0"));

    let config = read_json(&dir.path().join("config.json"));
    assert_eq!(config["depth"], 12);
    assert_eq!(config["range"], serde_json::json!([2, 4]));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["quotients", "--case", "B", "--grid", "ts:5:20", "--format", "csv,json,svg", "--out", out];
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(code(&smoothk(&args)), 0);
    let first: Vec<_> = ["quotients.csv", "quotients.json", "quotients.svg", "config.json"].map(read).into();
    assert_eq!(code(&smoothk(&["--sequential"].into_iter().chain(args).collect::<Vec<_>>())), 0);
    let second: Vec<_> = ["quotients.csv", "quotients.json", "quotients.svg", "config.json"].map(read).into();
    assert_eq!(first, second);
}

#[test]
fn project_emits_json() {
    let o = smoothk(&["project", "--case", "B", "--point", "2,0"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["point"]["x"], 1.0);
    assert_eq!(v["point"]["y"], 0.0);
    assert_eq!(v["distance"], 1.0);
    assert_eq!(v["truncation_safe"], true);

    let o = smoothk(&["project", "--case", "A", "--point", "-0.2,0.1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["piece_index"], -1);

    let o = smoothk(&["project", "--case", "B", "--point", "0.9,-3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    let (x, y) = (v["point"]["x"].as_f64().unwrap(), v["point"]["y"].as_f64().unwrap());
    assert!(x > 0.0 && y < 0.0 && (x.hypot(y) - 1.0).abs() < 0.5);

    assert_eq!(code(&smoothk(&["project", "--case", "B", "--point", "2,oops"])), 64);
}

#[test]
fn verify_reports_targets_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = smoothk(&["verify", "--lemma", "radius-limit", "--case", "B", "--lambda", "0.5", "--out", out]);
    assert_eq!(code(&o), 0);
    let v = read_json(&dir.path().join("report-radius-limit.json"));
    let target = v["verification"]["report"]["target"][0].as_f64().unwrap();
    assert!((target - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(v["config"]["lambda"], 0.5);
    assert_eq!(v["verification"]["report"]["passed"], true);

    let o = smoothk(&["verify", "--lemma", "chord-speed", "--case", "A", "--q", "1", "--format", "csv,json", "--out", out]);
    assert_eq!(code(&o), 0);
    let v = read_json(&dir.path().join("report-chord-speed.json"));
    assert_eq!(v["verification"]["report"]["target"], serde_json::json!([0.0, 1.0]));
    let csv = std::fs::read_to_string(dir.path().join("report-chord-speed.csv")).unwrap();
    assert!(csv.starts_with("n,x,y,deviation\n10,"));
    assert_eq!(csv.lines().count(), 1 + 491);

    let o = smoothk(&["verify", "--lemma", "nonexistence", "--case", "C", "--lambda", "0.4", "--out", out]);
    assert_eq!(code(&o), 0);
    let v = read_json(&dir.path().join("report-nonexistence.json"));
    assert_eq!(v["verification"]["report"]["verdict"], "nonconvergent");
}

#[test]
fn verify_failure_and_depth_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = smoothk(&["verify", "--lemma", "chord-speed", "--case", "A", "--tolerance", "1e-6", "--out", out]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));

    let o = smoothk(&["verify", "--lemma", "radius-limit", "--case", "B", "--range", "5:30", "--depth", "20", "--out", out]);
    assert_eq!(code(&o), 65);
    let o = smoothk(&["construct", "--case", "B", "--range", "2:19", "--depth", "20", "--out", out]);
    assert_eq!(code(&o), 65);
    let o = smoothk(&["construct", "--case", "C", "--lambda", "0.4", "--depth", "40", "--out", out]);
    assert_eq!(code(&o), 65);
}

#[test]
fn quotient_csv_rows_match_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = smoothk(&["quotients", "--case", "B", "--grid", "ts:5:30", "--out", out]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("quotients.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 26);
    let last_t = rows.iter().rev().find(|r| r.ends_with(",t")).unwrap();
    let dy: f64 = last_t.split(',').nth(2).unwrap().parse().unwrap();
    assert!((dy - 0.5).abs() < 1e-12);
    let last_s = rows.iter().rev().find(|r| r.ends_with(",s")).unwrap();
    let dy: f64 = last_s.split(',').nth(2).unwrap().parse().unwrap();
    assert!((dy - 5.0 / 11.0).abs() < 1e-12);
    assert!(dir.path().join("quotients.svg").exists());

    let o = smoothk(&["quotients", "--case", "C", "--grid", "dyadic:1:12", "--out", out]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("quotients.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(r#"{{"case": "B", "lambda": 0.25, "depth": 15, "output": {:?}, "formats": ["json"]}}"#, out),
    )
    .unwrap();
    let o = smoothk(&["construct", "--config", cfg.to_str().unwrap(), "--depth", "14"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let written = read_json(&out.join("config.json"));
    assert_eq!(written["lambda"], 0.25);
    assert_eq!(written["depth"], 14);
    assert!(out.join("boundary.json").exists());
    assert!(!out.join("boundary.svg").exists());

    std::fs::write(&cfg, r#"{"case": "B", "colour": "blue"}"#).unwrap();
    assert_eq!(code(&smoothk(&["validate", "--config", cfg.to_str().unwrap()])), 64);
    assert_eq!(code(&smoothk(&["validate", "--config", "/nonexistent/run.json"])), 74);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    assert_eq!(code(&smoothk(&["construct", "--case", "B", "--out", out.to_str().unwrap()])), 74);
}
