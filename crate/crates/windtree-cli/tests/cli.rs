//! End-to-end checks of the command-line surface: exit codes, schemas and
//! byte determinism.

use std::path::PathBuf;
use std::process::Command;

fn windtree() -> Command {
    Command::new(env!("CARGO_BIN_EXE_windtree"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = tempfile::tempdir().expect("tempdir").keep();
    dir.join(name)
}

#[test]
fn certify_golden_exit_zero() {
    let out = tmp("cert.json");
    let status = windtree()
        .args([
            "certify", "--mh", "1", "--nh", "2", "--mv", "1", "--nv", "2", "--coeffs", "1",
            "--periodic", "--depth", "16", "--pattern-level", "8", "--no-meta", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(cert["verdict"], "certified_to_depth");
    assert_eq!(cert["schema"], "windtree/1");
    assert_eq!(cert["checks"]["positivity_level"], 3);
}

#[test]
fn certify_odd_twist_exit_two() {
    let status = windtree()
        .args([
            "certify", "--mh", "1", "--nh", "1", "--mv", "1", "--nv", "1", "--expansion", "1",
            "--periodic", "--depth", "8", "--out", "/dev/null",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn certify_missing_depth_exit_four() {
    let output = windtree()
        .args(["certify", "--mh", "1", "--nh", "2", "--mv", "1", "--nv", "2", "--coeffs", "1", "--periodic"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn json_output_is_deterministic() {
    let run = || {
        windtree()
            .args(["params", "veech", "--mh", "1", "--nh", "3", "--mv", "1", "--nv", "2", "--no-meta"])
            .output()
            .unwrap()
    };
    let first = run();
    let second = run();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let v: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["D"], 3); // radicand 1 + (3-2)^2 + 2(3+2) = 12, squarefree part 3
}

#[test]
fn renorm_golden_sequence() {
    let output = windtree()
        .args(["renorm", "--Z", "1,1,sqrt(2)-1,sqrt(2)-1", "--steps", "5", "--no-meta"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["status"], "truncated");
    assert_eq!(v["entries"].as_array().unwrap().len(), 5);
    assert_eq!(v["entries"][0][0], 1);
    assert_eq!(v["entries"][0][1], 2);
}

#[test]
fn words_stats_only() {
    let conv = tmp("convs.json");
    std::fs::write(&conv, "[[1,2],[1,2],[1,2],[1,2]]").unwrap();
    let output = windtree()
        .args(["words", "--level", "4", "--stats-only", "--no-meta", "--convergents"])
        .arg(&conv)
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["lengths"]["L"][0], "17");
    assert_eq!(v["lengths"]["R"][0], "41");
    assert_eq!(v["endpoints"]["Y"], serde_json::json!(["5", "6", "13"]));
}

#[test]
fn trace_compare_render_pipeline() {
    let csv = tmp("traj.csv");
    let status = windtree()
        .args([
            "trace", "--a", "1/2", "--b", "1/2", "--slope", "sqrt(2)-1", "--start", "1/2,3/5",
            "--crossings", "100", "--out",
        ])
        .arg(&csv)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let data_lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("n,")).collect();
    assert_eq!(data_lines.len(), 100);
    assert_eq!(data_lines[0].split(',').count(), 9);

    let status = windtree()
        .args([
            "compare", "--a", "1/2", "--b", "1/2", "--slope", "sqrt(2)-1", "--start", "1/2,3/5",
            "--crossings", "200", "--language-level", "10", "--out", "/dev/null",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));

    let conv = tmp("convs.json");
    std::fs::write(&conv, "[[1,2],[1,2],[1,2],[1,2],[1,2],[1,2],[1,2],[1,2]]").unwrap();
    let svg = tmp("fig.svg");
    let status = windtree()
        .args(["render", "--boxes-levels", "4,6,8", "--traj"])
        .arg(&csv)
        .arg("--convergents")
        .arg(&conv)
        .arg("--out")
        .arg(&svg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let content = std::fs::read_to_string(&svg).unwrap();
    assert!(content.starts_with("<!-- windtree/1 -->"));
    assert!(content.contains("data-level=\"8\""));
    assert!(content.contains("<path"));
}

#[test]
fn render_rejects_malformed_csv() {
    let csv = tmp("bad.csv");
    std::fs::write(&csv, "n,t,x,y,event_type,cell_i,cell_j,letter,kappa\n0,0.1,0.2\n").unwrap();
    let output = windtree().args(["render", "--traj"]).arg(&csv).output().unwrap();
    assert_eq!(output.status.code(), Some(4));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains(":2:"), "error should carry the line number: {err}");
}

#[test]
fn compare_bounded_bouncing_control() {
    let output = windtree()
        .args([
            "compare", "--a", "1/2", "--b", "1/2", "--slope", "0", "--start", "1/2,1/10",
            "--crossings", "500", "--no-meta",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["verdict"], "bound_holds");
    assert!(v["max_deviation"].as_f64().unwrap() <= 1.4142135624);
}

#[test]
fn slope_exact_and_numeric() {
    let output = windtree()
        .args(["slope", "--widths", "2,2", "--coeffs", "1", "--periodic", "--exact", "--no-meta"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["cot"]["exact"], "1+1*sqrt(2)");

    let output = windtree()
        .args([
            "slope", "--widths", "2,2", "--coeffs", "1,1,1", "--precision-bits", "40", "--no-meta",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    let dec = v["cot"]["decimal"].as_f64().unwrap();
    assert!((dec - 2.4).abs() < 1e-9);
}
