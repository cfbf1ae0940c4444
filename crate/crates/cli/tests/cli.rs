use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clustersync_cli::config::RunConfig;
use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clustersync"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const EXAMPLE_ROWS: &str = r#"[[-1, 1, -0.1, 0.3, -0.2], [1, -1, 0.1, -0.3, 0.2],
    [-0.1, 0.1, -2, 1, 1], [0.3, -0.3, 1, -2, 1], [-0.2, 0.2, 1, 1, -2]]"#;

fn inline_example(a_rows: &str, p: f64) -> String {
    format!(
        r#"{{"scenario": {{"inline": {{
            "cluster_sizes": [2, 3], "a": {a_rows},
            "alpha": 30, "beta": 130, "eps1": 30, "eps2": 130, "p": {p}, "q": 2,
            "dynamics": {{"kind": "chaotic"}},
            "targets": [[0.4, 0.1, -0.2], [0.1, 0.1, 0.1]]}}}}}}"#
    )
}

fn scalar_master_slave(extra: &str) -> String {
    format!(
        r#"{{"scenario": {{"inline": {{
            "cluster_sizes": [1], "alpha": 1, "beta": 1, "eps1": 1, "eps2": 1, "p": 0.5, "q": 2,
            "dynamics": {{"kind": "zero", "dim": 1}}, "targets": [[0]]}}}},
          "regime": "master-slave"{extra}}}"#
    )
}

#[test]
fn validate_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("result: PASS"));
    assert!(s.contains("block (1,2) A3: pass"));
}

#[test]
fn validate_flags_broken_off_diagonal_block() {
    let dir = tempfile::tempdir().unwrap();
    // a whole row scaled by 2 still sums to zero, so double a single entry
    let rows = r#"[[-1, 1, -0.2, 0.3, -0.2], [1, -1, 0.1, -0.3, 0.2],
        [-0.2, 0.1, -2, 1, 1], [0.3, -0.3, 1, -2, 1], [-0.2, 0.2, 1, 1, -2]]"#;
    let cfg = write(dir.path(), "bad.json", &inline_example(rows, 0.5));
    let o = run(dir.path(), &["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("block (1,2) A3: fail"), "{s}");
    assert!(s.contains("result: FAIL"));
}

#[test]
fn validate_reports_parameter_domain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", &inline_example(EXAMPLE_ROWS, 1.5));
    let o = run(dir.path(), &["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("p must lie in (0,1)"));
}

#[test]
fn bounds_json_has_fixed_keys_and_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["bounds", "--output", "out/ex"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/ex.bounds.json")).unwrap()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in [
        "regime", "rho1", "rho2", "n_bar", "alpha_bar", "beta_bar", "gamma1", "gamma2",
        "alpha_threshold", "beta_threshold", "feasible", "t_max",
    ] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert!((v["alpha_threshold"].as_f64().unwrap() - 29.33).abs() < 0.1);
    assert!((v["beta_threshold"].as_f64().unwrap() - 131.247).abs() < 1e-3);
    assert_eq!(v["feasible"], Value::Bool(false));
    assert_eq!(v["t_max"], Value::Null);
}

#[test]
fn bounds_master_slave_settling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ms.json", &scalar_master_slave(r#", "delta": 0"#));
    let o = run(dir.path(), &["bounds", "--config", &cfg, "--output", "ms"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("ms.bounds.json")).unwrap()).unwrap();
    assert!((v["t_max"].as_f64().unwrap() - 3.0855).abs() < 1e-4);
    assert_eq!(v["threshold_gains"][0], "eps1");
}

#[test]
fn simulate_writes_trajectory_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["simulate", "--output", "sim", "--step", "1e-3", "--t-end", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("sim.trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,E,V,x_1_1,x_1_2,x_1_3,x_2_1"));
    assert!(header.ends_with("x_5_3,s_1_1,s_1_2,s_1_3,s_2_1,s_2_2,s_2_3"));
    assert_eq!(csv.lines().count(), 1 + 501);
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("sim.summary.json")).unwrap()).unwrap();
    assert_eq!(v["initial_nodes"].as_array().unwrap().len(), 5);
    assert!(v["lyapunov_check"]["checked"].as_u64().unwrap() > 0);
    assert!(stdout(&o).contains("settling time"));
}

#[test]
fn simulate_from_zero_error_settles_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "z.json",
        &scalar_master_slave(r#", "initial_nodes": [[0]], "integrator": {"step": 0.01, "t_end": 1}, "output": "z", "formats": ["json"]"#),
    );
    let o = run(dir.path(), &["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("z.summary.json")).unwrap()).unwrap();
    assert_eq!(v["settling_time"].as_f64(), Some(0.0));
    assert!(!dir.path().join("z.trajectory.csv").exists());
}

#[test]
fn consensus_run_settles_before_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"scenario": {"preset": {"name": "example", "alpha": 40, "beta": 60}}, "regime": "consensus",
            "integrator": {"step": 1e-4, "t_end": 1}, "output": "c", "formats": ["json"]}"#,
    );
    let o = run(dir.path(), &["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.summary.json")).unwrap()).unwrap();
    let t_max = v["bounds"]["t_max"].as_f64().expect("feasible consensus gains");
    assert_eq!(v["bounds"]["regime"], "cluster-consensus");
    assert!(v["settling_time"].as_f64().unwrap() <= t_max);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--step", "1e-3", "--t-end", "0.3", "--seed", "9"];
    let mut a = args.to_vec();
    a.extend(["--output", "a"]);
    let mut b = args.to_vec();
    b.extend(["--output", "b"]);
    run(dir.path(), &a);
    run(dir.path(), &b);
    for suffix in [".trajectory.csv", ".summary.json"] {
        let x = fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let y = fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert_eq!(x, y, "{suffix}");
    }
}

#[test]
fn emitted_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ms.json", &scalar_master_slave(r#", "delta": "estimate", "seed": 3"#));
    let o = run(dir.path(), &["config", "--config", &cfg, "--step", "0.002"]);
    assert_eq!(o.status.code(), Some(0));
    let parsed = RunConfig::from_json(&stdout(&o)).unwrap();
    assert_eq!(parsed.integrator.step, 0.002);
    assert_eq!(RunConfig::from_json(&parsed.to_json()).unwrap(), parsed);
}

#[test]
fn parse_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"scenario": {"preset": {"name": "example"}}, "regime": "chaos"}"#);
    let o = run(dir.path(), &["bounds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("regime"));
    assert_eq!(run(dir.path(), &["bounds", "--seed", "minus-one"]).status.code(), Some(3));
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(3));
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.json",
        r#"{"scenario": {"inline": {"cluster_sizes": [1], "alpha": 1, "beta": 1, "eps1": 1, "eps2": 1e6,
            "p": 0.5, "q": 2, "dynamics": {"kind": "zero", "dim": 1}, "targets": [[0]]}},
           "regime": "master-slave", "initial_nodes": [[10]],
           "integrator": {"method": "euler", "step": 0.01, "t_end": 1}}"#,
    );
    let o = run(dir.path(), &["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged at t ="));
}

#[test]
fn matrices_load_from_files() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.txt", "# two-node path\n-1 1\n1 -1\n");
    let cfg = write(
        dir.path(),
        "f.json",
        r#"{"scenario": {"inline": {"cluster_sizes": [2], "a": "a.txt", "alpha": 1, "beta": 1,
            "eps1": 1, "eps2": 1, "p": 0.5, "q": 2, "dynamics": {"kind": "zero", "dim": 2},
            "targets": [[0, 0]]}}, "regime": "complete", "delta": 0}"#,
    );
    let o = run(dir.path(), &["bounds", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("bounds (complete)"));
}

#[test]
fn nn_stabilization_reaches_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let body = |target: &str| {
        format!(
            r#"{{"scenario": {{"inline": {{"cluster_sizes": [1], "alpha": 1, "beta": 1, "eps1": 10, "eps2": 10,
                "p": 0.5, "q": 2, "dynamics": {{"kind": "neural", "w1": [[-1, 0], [0, -1]],
                "w2": [[0.5, -0.2], [0.1, 0.3]], "activation": "tanh"}}, "targets": [{target}]}}}},
               "regime": "nn-stabilization", "integrator": {{"step": 1e-3, "t_end": 3}},
               "output": "nn", "formats": ["json"]}}"#
        )
    };
    let cfg = write(dir.path(), "nn.json", &body("[0, 0]"));
    let o = run(dir.path(), &["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("nn.summary.json")).unwrap()).unwrap();
    assert!(v["settling_time"].as_f64().is_some());
    assert!(!stdout(&o).contains("warning"));

    let cfg = write(dir.path(), "off.json", &body("[1, 1]"));
    let o = run(dir.path(), &["simulate", "--config", &cfg]);
    assert!(stdout(&o).contains("warning: target is not an equilibrium"));
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["sweep", "--param", "beta", "--values", "10,50,150", "--step", "1e-4", "--t-end", "3", "--output", "sw"],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sw.sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("param_value,settling_measured,T_max_theoretical,feasible"));
    assert_eq!(lines.count(), 3);
    assert!(stdout(&o).contains("settling strictly decreasing in beta"));
}

// Red under the default initial spread: with errors below 1 the |e|^q term
// weakens as q grows (0.93 / 1.20 / 1.36 s). Kept as stated.
#[test]
fn settling_nearly_independent_of_q() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "q.json",
        r#"{"scenario": {"preset": {"name": "example", "alpha": 5, "beta": 10, "p": 0.5}},
            "integrator": {"step": 1e-4, "t_end": 5}, "sweep": {"param": "q", "values": [1.5, 2, 2.5]},
            "output": "q", "formats": ["json"]}"#,
    );
    let o = run(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("q.sweep.json")).unwrap()).unwrap();
    let t: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| r["settling_measured"].as_f64().unwrap()).collect();
    let (lo, hi) = t.iter().fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(hi <= 1.15 * lo, "{t:?}");
}

#[test]
fn reproduction_flags_disagreements() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["paper-example", "--output", "rep", "--t-end", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("rep.reproduction.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("gamma2,") && l.ends_with(",disagree")));
    assert!(csv.lines().any(|l| l.starts_with("rho1,") && l.ends_with(",agree")));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rep.reproduction.json")).unwrap()).unwrap();
    assert!((v["bounds"]["gamma2"].as_f64().unwrap() - 0.7637).abs() < 1e-3);
}
