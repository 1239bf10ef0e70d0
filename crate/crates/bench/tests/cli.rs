use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_subzero-bench");

fn bench(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dp_run_reports_success_and_writes_contract_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = bench(&["run", "--problem", "quadratic", "--n", "2", "--solver", "dp", "--eps", "1e-2", "--seed", "7", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run_id,solver,n,k,phase,queries_cumulative,f_center,suboptimality,log_volume,cone_angle,instantaneous_regret,cumulative_regret"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 12);
    assert_eq!(first[1], "dp");
    assert_eq!(first[4], "");
    assert!(String::from_utf8_lossy(&o.stdout).contains(" ok"));
}

#[test]
fn missing_eps_is_a_schema_error() {
    let o = bench(&["run", "--problem", "quadratic", "--n", "2", "--solver", "dp"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("eps: required for solver dp"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"problem": {"kind": "quadratic", "n": 2}, "solver": "dp", "eps": 0.01, "seedz": [1]}"#).unwrap();
    let o = bench(&["run", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seedz"), "{}", stderr(&o));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"problem": {"kind": "logsumexp", "n": 3}, "solver": "comparator", "eps": 0.01, "seeds": [1, 2]}"#).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = bench(&["run", "--config", path(&cfg), "--out", path(out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn json_mirrors_csv_records() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    let base = ["run", "--problem", "smoothed-norm", "--n", "2", "--solver", "value", "--eps", "0.01", "--seed", "3", "--out"];
    let o = bench(&[&base[..], &[path(&csv)]].concat());
    assert_eq!(o.status.code(), Some(0));
    let o = bench(&[&base[..], &[path(&json), "--format", "json"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let csv_rows = std::fs::read_to_string(&csv).unwrap().lines().count() - 1;
    assert_eq!(rows.len(), csv_rows);
    assert!(rows[0]["phase"].is_null());
    assert_eq!(rows[0]["solver"], "value");
}

#[test]
fn regret_run_fills_regret_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let report = dir.path().join("r.json");
    let o = bench(&[
        "run",
        "--problem",
        "quadratic",
        "--n",
        "2",
        "--instance-seed",
        "0",
        "--solver",
        "regret-nv",
        "--T",
        "20000",
        "--delta",
        "0.1",
        "--sigma",
        "0.05",
        "--seeds",
        "0..2",
        "--out",
        path(&out),
        "--report",
        path(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[4], "1");
    assert!(!last[10].is_empty() && !last[11].is_empty());
    let reports: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[1]["total_queries"], 20000);
    assert!(reports[0]["ground_truth"]["regret"].as_f64().unwrap() > 0.0);
}

#[test]
fn interior_violation_refuses_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"kind": "smoothed-norm", "n": 2, "parameters": {"minimizer": [0.999, 0.0], "mu": 0.1}}, "solver": "dp", "eps": 0.01}"#,
    )
    .unwrap();
    let o = bench(&["run", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run refused"), "{}", stderr(&o));
}

#[test]
fn query_cap_is_an_error() {
    let o = bench(&["run", "--problem", "quadratic", "--n", "2", "--solver", "dp", "--eps", "0.01", "--max-queries", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("budget"), "{}", stderr(&o));
}

#[test]
fn sweep_grid_has_one_row_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = bench(&[
        "sweep",
        "--problem",
        "quadratic",
        "--solver",
        "dp,comparator",
        "--n",
        "2,3,5",
        "--eps",
        "0.01",
        "--seeds",
        "0..5",
        "--out",
        path(&out),
        "--jobs",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 31);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);
    assert!(summary.lines().skip(1).all(|l| l.ends_with(",true")));
    assert_eq!(std::fs::read_dir(out.join("cells")).unwrap().count(), 6);
    let traces = std::fs::read_to_string(out.join("traces.csv")).unwrap();
    assert_eq!(traces.lines().filter(|l| l.starts_with("run_id")).count(), 1);
    assert_eq!(String::from_utf8_lossy(&o.stdout), summary);
}
