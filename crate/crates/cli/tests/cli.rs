use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn vharm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vharm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run vharm")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stray_temp_files(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for entry in walk(dir) {
        let name = entry.file_name().unwrap().to_string_lossy().to_string();
        if name.starts_with(".tmp") {
            out.push(name);
        }
    }
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

const SPHERE_FLOW: &str = r#"{
  "grid": [16, 16],
  "target": "sphere-stereo",
  "initial": {"kind": "perturbed", "base": [0.3, -0.2], "amplitude": 0.05},
  "max_iters": 10000,
  "tol": 1e-3
}"#;

#[test]
fn list_shows_twelve_scenarios() {
    let dir = TempDir::new().unwrap();
    let text = vharm(dir.path(), &["list"]);
    assert_eq!(code(&text), 0);
    assert_eq!(String::from_utf8_lossy(&text.stdout).lines().count(), 12);

    let json = vharm(dir.path(), &["list", "--format", "json"]);
    assert_eq!(code(&json), 0);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 12);

    std::fs::write(dir.path().join("empty.json"), "").unwrap();
    let empty = vharm(dir.path(), &["list", "--registry", "empty.json"]);
    assert_eq!(code(&empty), 0);
    assert_eq!(String::from_utf8_lossy(&empty.stdout).lines().count(), 12);
}

#[test]
fn check_writes_report_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let o = vharm(dir.path(), &["check", "S1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&dir.path().join("reports/S1.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert!(stray_temp_files(dir.path()).is_empty());
}

#[test]
fn check_complex_line_with_explicit_sampler() {
    let dir = TempDir::new().unwrap();
    let o = vharm(
        dir.path(),
        &[
            "check", "S4", "--points", "200", "--seed", "42", "--out", "s4.json",
        ],
    );
    assert_eq!(code(&o), 0);
    let report = read_json(&dir.path().join("s4.json"));
    assert_eq!(report["config"]["points"], 200);
    let r1 = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["operation"]["quantity"] == "r1")
        .expect("r1 check");
    assert!(r1["sup"].as_f64().unwrap() < 1e-6);
}

#[test]
fn invalid_requests_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["check", "nosuch"][..],
        &["check", "S1", "--points", "0"],
        &["check", "S1", "--tol=-1"],
        &["check", "S1", "--tol", "nan"],
    ] {
        let o = vharm(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert!(!dir.path().join("reports").exists());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&vharm(dir.path(), &["check", "S6", "--out", "a.json"])),
        0
    );
    assert_eq!(
        code(&vharm(dir.path(), &["check", "S6", "--out", "b.json"])),
        0
    );
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn custom_registry_scenario_runs() {
    let dir = TempDir::new().unwrap();
    let custom = r#"[{
      "name": "flat-compat",
      "title": "flat-compatibility",
      "claim": "the flat plane has vanishing Christoffel symbols",
      "sampler": {"points": 10, "seed": 3},
      "checks": [{
        "label": "compatibility",
        "operation": {"op": "metric_compatibility", "metric": "flat-r2"},
        "expect": {"kind": "below", "tol": 1e-12},
        "domain": "unit-square"
      }]
    }]"#;
    std::fs::write(dir.path().join("custom.json"), custom).unwrap();
    let list = vharm(dir.path(), &["list", "--registry", "custom.json"]);
    assert_eq!(String::from_utf8_lossy(&list.stdout).lines().count(), 13);
    let o = vharm(
        dir.path(),
        &["check", "flat-compat", "--registry", "custom.json"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        read_json(&dir.path().join("reports/flat-compat.json"))["config"]["points"],
        10
    );

    std::fs::write(
        dir.path().join("shadow.json"),
        custom.replace("flat-compat\"", "S1\""),
    )
    .unwrap();
    assert_eq!(
        code(&vharm(dir.path(), &["list", "--registry", "shadow.json"])),
        2
    );
}

#[test]
fn flow_exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    std::fs::write(p.join("ok.json"), SPHERE_FLOW).unwrap();
    let o = vharm(p, &["flow", "ok.json", "--out", "ok-out.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        read_json(&p.join("ok-out.json"))["trace"]["converged"],
        true
    );

    std::fs::write(p.join("short.json"), SPHERE_FLOW.replace("10000", "1")).unwrap();
    let o = vharm(p, &["flow", "short.json", "--out", "short-out.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(
        read_json(&p.join("short-out.json"))["trace"]["non_convergence_warning"],
        true
    );

    std::fs::write(
        p.join("neg.json"),
        SPHERE_FLOW.replace("\"tol\"", "\"step\": -1, \"tol\""),
    )
    .unwrap();
    assert_eq!(code(&vharm(p, &["flow", "neg.json"])), 2);

    std::fs::write(p.join("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&vharm(p, &["flow", "bad.json"])), 2);
    assert_eq!(code(&vharm(p, &["flow", "missing.json"])), 2);
    assert!(stray_temp_files(p).is_empty());
}

#[test]
fn all_writes_every_report() {
    let dir = TempDir::new().unwrap();
    let o = vharm(dir.path(), &["all", "--out", "out"]);
    let reports: Vec<Value> = (1..=12)
        .map(|i| read_json(&dir.path().join(format!("out/S{i}.json"))))
        .collect();
    let all_passed = reports.iter().all(|r| r["passed"] == true);
    assert_eq!(code(&o), if all_passed { 0 } else { 1 });
    assert!(stray_temp_files(dir.path()).is_empty());
}
