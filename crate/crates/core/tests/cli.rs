use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_serrin-annulus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, idx: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn eigens_table_layout_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = run(&["eigens", "--n", "3", "--k", "0..3", "--lambda", "0.01:0.99:99", "--out", path.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "n,k,j,lambda,mu");
    assert_eq!(text.lines().count(), 1 + 8 * 99);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn eigens_translation_branch_vanishes() {
    let o = run(&["eigens", "--n", "2", "--k", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| l.starts_with("2,1,2,")).collect();
    assert_eq!(rows.len(), 99);
    for r in rows {
        let mu: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(mu.abs() < 1e-12);
    }
}

#[test]
fn usage_errors_exit_one_with_one_line() {
    for args in [
        vec!["eigens", "--n", "2", "--k", "1", "--lambda", "0.1:0.9:0"],
        vec!["bifurcations", "--n", "2", "--kmax", "0"],
        vec!["eigens", "--n", "1", "--k", "1"],
        vec!["branch", "--n", "3", "--s", "0.01"],
        vec!["no-such-command"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    }
}

#[test]
fn io_errors_exit_three() {
    let o = run(&["bifurcations", "--n", "2", "--kmax", "2", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bifurcation_tables() {
    let o = run(&["bifurcations", "--n", "2", "--kmax", "10", "--tol", "1e-12"]);
    assert!(o.status.success());
    let lambdas = column(&stdout(&o), 3);
    assert_eq!(lambdas.len(), 10);
    assert!(lambdas.windows(2).all(|w| w[1] > w[0]));

    let o = run(&["bifurcations", "--n", "3", "--kmax", "5"]);
    let residuals = column(&stdout(&o), 4);
    assert!(residuals.iter().all(|r| *r < 1e-12));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n": 2, "k": "0..1", "lambda": "0.3:0.6:4"}"#).unwrap();
    let o = run(&["eigens", "--config", cfg.to_str().unwrap(), "--n", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 4 * 4);
    assert!(text.lines().skip(1).all(|l| l.starts_with("4,")));

    fs::write(&cfg, r#"{"n": 2, "bogus": 1}"#).unwrap();
    let o = run(&["eigens", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn branch_writes_records_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["branch", "--n", "2", "--mode", "2", "--s", "0.005,0.01,0.02", "--out-dir", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("branch.jsonl")).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 3);
    for r in &records {
        assert!(r["residual_sup"].as_f64().unwrap() < 1e-6);
        assert!(r["overdetermined"]["max_joint_deviation"].as_f64().unwrap() < 1e-6);
        assert!(r["cheeger"]["gap_abs"].as_f64().unwrap() < 1e-5);
        assert!(r["cheeger"]["grad_bound_ok"].as_bool().unwrap());
    }
    let csv = fs::read_to_string(dir.path().join("boundary_002.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "theta,r_inner,r_outer");
    assert_eq!(csv.lines().count(), 257);
}

#[test]
fn branch_failure_keeps_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["branch", "--s", "0.005,0.9", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(2));
    let text = fs::read_to_string(dir.path().join("branch.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn quick_validation_passes() {
    let o = run(&["validate", "--quick"]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["passed"], serde_json::Value::Bool(true));
}

#[test]
fn solve_and_cheeger_on_trivial_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--lambda", "0.5", "--traces-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((summary["inner_trace_cosine"][0].as_f64().unwrap() - 0.25).abs() < 1e-8);
    let trace = fs::read_to_string(dir.path().join("outer_trace.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "theta,value");

    let o = run(&["cheeger", "--lambda", "0.5"]);
    let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep["gap_abs"].as_f64().unwrap() < 1e-12);

    let o = run(&["solve", "--lambda", "0.5", "--coeffs1", "0.6"]);
    assert_eq!(o.status.code(), Some(1));
}
