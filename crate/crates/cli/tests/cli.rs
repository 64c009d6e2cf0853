use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aggregation"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("MANIFEST.json")).unwrap()).unwrap()
}

#[test]
fn kernel_prints_self_term() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["kernel", "--d", "3", "--alpha", "1", "--rho", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((value - 2.0 / 3.0).abs() < 1e-12);

    let m = manifest(&tmp.path().join("out"));
    for key in ["command", "config", "started_at", "duration_seconds", "outputs", "status", "version"] {
        assert!(m.get(key).is_some(), "missing {key}");
    }
    assert_eq!(m["status"], "complete");
    assert_eq!(m["config"]["d"], 3);
    assert!(tmp.path().join("out/kernel.csv").exists());
}

#[test]
fn simulate_writes_trajectory_and_events() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--data", "power_law", "--d", "3", "--alpha", "1", "--epsilon", "0.5", "--rings", "2000", "--t-end", "0.2"];
    let out = run(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    let traj = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("time,ring_label,radius,mass,origin_mass\n"));
    let events = std::fs::read_to_string(dir.join("events.csv")).unwrap();
    assert!(events.starts_with("time,kind,label\n"));
    assert_eq!(manifest(&dir)["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn validation_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 5] = [
        (&["verify", "--d", "3", "--alpha", "2.5"], "alpha must lie in (2−d, 2)"),
        (&["simulate", "--data", "log_critical_alpha1", "--d", "2", "--k", "0.3"], "k must lie in ((d−1)/d, 1)"),
        (&["simulate", "--data", "power_law", "--epsilon", "1.5"], "epsilon must lie in (0, 1)"),
        (&["kernel", "--d", "1"], "d must be at least 2"),
        (&["ratio", "--data", "power_law", "--epsilon", "0.5"], "data must be log_critical_alpha1"),
    ];
    for (args, message) in cases {
        let out = run(tmp.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(message), "{args:?}: {err}");
    }
    // nothing is computed or written for a rejected configuration
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_flags_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["kernel", "--dimension", "3"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["simulate", "--data", "gaussian"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_keeps_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--data", "power_law", "--epsilon", "0.5", "--rings", "50", "--rel-tol", "1e-300", "--abs-tol", "1e-300",
    ];
    let out = run(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("step size underflow"));
    let dir = tmp.path().join("out");
    let m = manifest(&dir);
    assert_eq!(m["status"], "incomplete");
    assert!(m["error"].as_str().unwrap().contains("underflow"));
    let traj = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 51);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.json");
    std::fs::write(&config, r#"{"command": "kernel", "d": 2, "alpha": 0.5, "rho": [0.5, 2.0], "output_dir": "from_file"}"#).unwrap();
    let out = run(tmp.path(), &["kernel", "--config", "run.json", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let m = manifest(&tmp.path().join("from_file"));
    assert_eq!(m["config"]["d"], 2);
    assert_eq!(m["config"]["alpha"], 1.0);
    assert_eq!(m["config"]["rho"], serde_json::json!([0.5, 2.0]));

    std::fs::write(&config, r#"{"dimension": 2}"#).unwrap();
    assert_eq!(run(tmp.path(), &["kernel", "--config", "run.json"]).status.code(), Some(2));
    std::fs::write(&config, r#"{"command": "ratio"}"#).unwrap();
    assert_eq!(run(tmp.path(), &["kernel", "--config", "run.json"]).status.code(), Some(2));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["kernel", "--rho", "0.5,1,2", "--samples", "5000", "--seed", "11"],
        &["simulate", "--data", "log_critical_alpha1", "--d", "2", "--k", "0.75", "--rings", "300", "--t-end", "0.1"],
        &["similarity", "--d", "2", "--rho1", "1", "--rho2", "3"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for dir in ["a", "b"] {
            let mut full = args.to_vec();
            full.extend(["--output-dir", dir]);
            assert_eq!(run(tmp.path(), &full).status.code(), Some(0), "{full:?}");
            let listed = manifest(&tmp.path().join(dir))["outputs"].clone();
            let files: Vec<Vec<u8>> = listed
                .as_array()
                .unwrap()
                .iter()
                .map(|p| std::fs::read(tmp.path().join(p.as_str().unwrap())).unwrap())
                .collect();
            outputs.push(files);
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}

#[test]
fn diagnostics_write_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["verify", "--d", "2", "--alpha", "1", "--data", "log_critical_alpha1", "--k", "0.75", "--rings", "1000", "--output-dir", "v"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("v/kernel_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    let bounds: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("v/bounds.json")).unwrap()).unwrap();
    assert_eq!(bounds["kind"], "lemma25");
    assert!(bounds["empirical_delta1"].as_f64().unwrap() > 0.0);

    let out = run(tmp.path(), &["similarity", "--d", "3", "--output-dir", "s"]);
    assert_eq!(out.status.code(), Some(0));
    let sim: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("s/similarity.json")).unwrap()).unwrap();
    assert_eq!(sim["search"]["status"], "infeasible");
    assert!((sim["witness"].as_f64().unwrap() - 5.0 / 48.0).abs() < 1e-9);

    let out = run(tmp.path(), &["ratio", "--data", "log_critical_general", "--k", "0.8", "--rings", "400", "--output-dir", "r"]);
    assert_eq!(out.status.code(), Some(0));
    let curve = std::fs::read_to_string(tmp.path().join("r/ratio.csv")).unwrap();
    assert!(curve.starts_with("r,ratio\n"));
    assert!(tmp.path().join("r/ratio_initial.csv").exists());

    let out = run(tmp.path(), &["scaling", "--data", "power_law", "--epsilon", "0.5", "--rings", "1000", "--threads", "2", "--output-dir", "c"]);
    assert_eq!(out.status.code(), Some(0));
    let scaling: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("c/scaling.json")).unwrap()).unwrap();
    assert!((scaling["slope"].as_f64().unwrap() - 0.5).abs() < 0.075);
    assert_eq!(manifest(&tmp.path().join("c"))["config"]["threads"], 2);
}
