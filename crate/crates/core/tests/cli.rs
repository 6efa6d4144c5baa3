use std::process::Command;

fn geols(args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_geols")).args(args).output().unwrap();
    (
        out.status.success(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn solve_with_oracle_reports_ratio() {
    let (ok, out, _) = geols(&["solve", "--problem", "tsp", "--n", "10", "--seed", "3", "--oracle"]);
    assert!(ok);
    let ratio: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("ratio "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio >= 1.0 - 1e-9);
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let (ok, _, err) = geols(&[
        "bench", "--problem", "fl", "--n", "8", "--seeds", "1,2,3", "--f", "0.5", "--oracle", "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(ok, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(dir.path().join("r.json").exists());
}

#[test]
fn bench_reads_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"problem":"kmedian","instance":{"generator":"uniform","n":9},"epsilon":0.0,"swap_budget":2,"k":2,"seeds":[4,5]}"#,
    )
    .unwrap();
    let (ok, out, _) = geols(&["bench", "--config", cfg.to_str().unwrap()]);
    assert!(ok);
    assert!(out.starts_with("problem,n,seed,"));
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn dissect_and_lowerbound_emit_json() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.json");
    assert!(geols(&["dissect", "--n", "40", "--seed", "2", "--out", tree.to_str().unwrap()]).0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&tree).unwrap()).unwrap();
    assert!(!v["nodes"].as_array().unwrap().is_empty());

    let (ok, out, _) = geols(&["dissect", "--trials", "2", "--clients", "50"]);
    assert!(ok);
    assert!(out.starts_with("trial,cost_e,cost_e0,ratio\n"));

    let (ok, out, _) = geols(&["lowerbound", "--k", "3"]);
    assert!(ok);
    assert!(out.contains("points 39"));
}

#[test]
fn invalid_input_fails() {
    assert!(!geols(&["oracle", "--problem", "tsp", "--n", "40"]).0);
    assert!(!geols(&["solve", "--problem", "tree"]).0);
    assert!(!geols(&["bench", "--config", "/nonexistent/c.json"]).0);
}
