use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qchart(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchart"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, name: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn value(v: &Value, path: &[&str]) -> f64 {
    let mut v = v;
    for p in path {
        v = &v[*p];
    }
    v.as_f64().unwrap_or_else(|| panic!("no number at {path:?}"))
}

#[test]
fn seminorm_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchart(dir.path(), &["seminorm", "--catalog", "rotation2d"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "seminorm.json");
    let res = &r["results"];
    assert!(value(res, &["q", "value"]) < 1e-6);
    assert!((value(res, &["lipschitz", "value"]) - 1.0).abs() < 1e-6);
    assert_eq!(res["chain"]["verdict"], "PASS");
    assert_eq!(r["source"]["name"], "rotation2d");
}

#[test]
fn contact_plane_is_not_involutive() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchart(dir.path(), &["involutivity", "--catalog", "contact3d"]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(dir.path(), "involutivity.json");
    assert!(value(&r["results"], &["report", "max_residual"]) >= 0.4);
    assert_eq!(r["results"]["passed"], false);
}

#[test]
fn parabola_chart_writes_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qchart(dir.path(), &["chart", "--catalog", "graph-parabola3d", "--slices", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "chart.json");
    assert!(value(&r["results"], &["metadata", "eps"]) >= 0.1);
    assert_eq!(r["results"]["lifted_seminorms"]["fields"].as_array().unwrap().len(), 2);
    for i in 1..=3 {
        let csv = std::fs::read_to_string(dir.path().join(format!("slice-{i}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("u1,u2,x1,x2,x3,residual"));
        assert_eq!(lines.count(), 33 * 33);
    }
}

#[test]
fn results_do_not_depend_on_threads() {
    let runs: Vec<Value> = ["1", "3"]
        .iter()
        .map(|t| {
            let dir = tempfile::tempdir().unwrap();
            let out = qchart(
                dir.path(),
                &["--threads", t, "--seed", "7", "seminorm", "--catalog", "xloga", "--base-points", "60"],
            );
            assert_eq!(out.status.code(), Some(0));
            report(dir.path(), "seminorm.json")["results"].clone()
        })
        .collect();
    assert_eq!(
        serde_json::to_string(&runs[0]).unwrap(),
        serde_json::to_string(&runs[1]).unwrap()
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(qchart(p, &["seminorm"]).status.code(), Some(1));
    assert_eq!(qchart(p, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(qchart(p, &["--grid", "1", "catalog"]).status.code(), Some(1));
    assert_eq!(qchart(p, &["seminorm", "--catalog", "nope"]).status.code(), Some(2));
    std::fs::write(p.join("bad.json"), r#"{"n": 2, "field": "x1; (x2"}"#).unwrap();
    let bad = p.join("bad.json");
    assert_eq!(qchart(p, &["seminorm", "--spec", bad.to_str().unwrap()]).status.code(), Some(2));
    let flow = qchart(p, &["flow", "--catalog", "abskink", "--x0", "-1,0", "--t", "5"]);
    assert_eq!(flow.status.code(), Some(3));
    assert_eq!(qchart(p, &["chart", "--catalog", "contact3d"]).status.code(), Some(4));
}

#[test]
fn spec_file_and_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("rot.json"), r#"{"n": 2, "field": "-x2; x1", "domain": {"lo": [-2, -2], "hi": [2, 2]}}"#)
        .unwrap();
    let spec = p.join("rot.json");
    let out = qchart(p, &["flow", "--spec", spec.to_str().unwrap(), "--x0", "1,0", "--t", "1.5707963267948966"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(p, "flow.json");
    let end: Vec<f64> = r["results"]["end"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(end[0].abs() < 1e-8 && (end[1] - 1.0).abs() < 1e-8);
    let csv = std::fs::read_to_string(p.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,x1,x2\n0,1,0\n"));
}

#[test]
fn remaining_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let ok = |args: &[&str]| {
        let out = qchart(p, args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    ok(&["bracket", "--catalog", "contact3d", "--grid", "3"]);
    let b = report(p, "bracket.json");
    assert!((value(&b["results"], &["max_norm"]) - 1.0).abs() < 1e-6);
    ok(&["commute", "--catalog", "graph-xy3d"]);
    let c = report(p, "commute.json");
    for row in c["results"]["table"].as_array().unwrap() {
        assert!(row["defect"].as_f64().unwrap() <= 1e-4);
    }
    ok(&["commute", "--catalog", "constant:1", "--with", "0; x1", "--times", "0.5"]);
    let c = report(p, "commute.json");
    assert!((value(&c["results"]["table"][0], &["defect"]) - 0.25).abs() < 0.0025);
    ok(&["distortion", "--catalog", "linear", "--div-bound", "1"]);
    assert_eq!(report(p, "distortion.json")["results"]["liouville"]["passed"], true);
    ok(&["mollify", "--catalog", "abskink"]);
    assert_eq!(report(p, "mollify.json")["results"]["strictly_decreasing"], true);
    ok(&["catalog"]);
    assert!(report(p, "catalog.json")["results"]["entries"].as_array().unwrap().len() >= 13);
}
