use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sepfour"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sepfour-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    for args in [&["--help"][..], &["estimate", "--help"], &["--version"]] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["estimate"]).status.code(), Some(1));
    assert_eq!(run(&["estimate", "x.txt", "--method", "magic"]).status.code(), Some(1));
    assert_eq!(run(&["estimate", "/nonexistent/corrs.txt"]).status.code(), Some(1));
}

#[test]
fn parse_errors_exit_one() {
    let dir = scratch("parse");
    let file = dir.join("bad.txt");
    std::fs::write(&file, "1 2 3\n").unwrap();
    let out = run(&["estimate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn estimation_failure_exits_two_with_report() {
    let dir = scratch("fail");
    let file = dir.join("few.txt");
    let report = dir.join("report.json");
    let text: String = (0..8).map(|i| format!("{} {} {} {}\n", 10 * i, (37 * i * i) % 100, (53 * i) % 90, 7 * i)).collect();
    std::fs::write(&file, text).unwrap();
    let out = run(&["estimate", path(&file), "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["method"], "fallback-8pt");
}

#[test]
fn synth_estimate_eval_round_trip() {
    let dir = scratch("flow");
    let (corrs, gt, report, metrics) =
        (dir.join("c.txt"), dir.join("gt.json"), dir.join("r.json"), dir.join("m.json"));
    let ok = |args: &[&str]| {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    ok(&["synth", "--outlier-rate", "0.3", "--noise", "0.5", "--seed", "4", "--out", path(&corrs), "--gt", path(&gt)]);
    ok(&["estimate", path(&corrs), "--inlier-ratio", "0.7", "--seed", "4", "--out", path(&report)]);
    ok(&["eval", "--report", path(&report), "--gt", path(&gt), "--corrs", path(&corrs), "--out", path(&metrics)]);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for key in ["schema", "fundamental", "inliers", "method", "samples_drawn", "hypothesis_evaluations", "step1", "residuals", "config", "seed"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["fundamental"].as_array().unwrap().len(), 9);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert!(m["true_positives"].as_u64().unwrap() >= 20);
}

#[test]
fn bench_writes_tables() {
    let dir = scratch("bench");
    let grid = dir.join("grid.json");
    std::fs::write(&grid, r#"{"trials": 2, "methods": ["separable", "ransac8"], "outlier_rates": [0.3]}"#).unwrap();
    let (table, curves) = (dir.join("t.csv"), dir.join("c.csv"));
    let out = run(&["bench", path(&grid), "--out", path(&table), "--curves", path(&curves)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t = std::fs::read_to_string(&table).unwrap();
    assert_eq!(t.lines().count(), 3);
    assert!(t.starts_with("method,outlier_rate,trials,successes"));
    assert_eq!(std::fs::read_to_string(&curves).unwrap().lines().count(), 2);
}
