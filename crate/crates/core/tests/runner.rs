use std::fs;

use ale_kahler::runner::*;
use serde_json::json;

fn opts(dir: &tempfile::TempDir) -> RunOptions {
    RunOptions {
        out: dir.path().to_path_buf(),
        use_cache: true,
    }
}

fn trivial(id: &str, eps: f64) -> serde_json::Value {
    json!({
        "id": id,
        "n": 2, "k": 1, "profile": "flat",
        "psi0": {"kind": "zero"}, "psi1": {"kind": "zero"},
        "epsilon": eps,
        "grid": {"n_rho": 17, "n_t": 17, "rho_min": 0.0, "rho_max": 6.0}
    })
}

fn scenario(v: serde_json::Value) -> Scenario {
    serde_json::from_value(v).unwrap()
}

#[test]
fn trivial_scenario_records_exact_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&scenario(trivial("triv", 0.5)), &opts(&dir)).unwrap();
    assert!(m.passed(), "{m:?}");
    assert!(m.checks["c0"].pass);
    assert!(m.checks["exact"].value <= 1e-8);
    for file in m.artifacts.values() {
        assert!(dir.path().join("triv").join(file).is_file());
    }
    assert!(dir.path().join("triv/manifest.json").is_file());
}

#[test]
fn malformed_config_names_the_field() {
    let mut v = trivial("bad", 0.5);
    v["k"] = json!(0);
    let dir = tempfile::tempdir().unwrap();
    let err = run_scenario(&scenario(v), &opts(&dir)).unwrap_err();
    assert!(err.is_validation());
    assert!(err.to_string().contains("`k`"), "{err}");
}

#[test]
fn hash_ignores_key_order_and_output_location() {
    let a = scenario(trivial("h", 0.5));
    let text = r#"{"grid": {"rho_max": 6.0, "n_t": 17, "rho_min": 0.0, "n_rho": 17},
        "epsilon": 0.5, "psi1": {"kind": "zero"}, "psi0": {"kind": "zero"},
        "profile": "flat", "k": 1, "n": 2, "id": "h", "output_dir": "/elsewhere"}"#;
    let b: Scenario = serde_json::from_str(text).unwrap();
    assert_eq!(a.content_hash(), b.content_hash());
    let c = scenario(trivial("h", 0.25));
    assert_ne!(a.content_hash(), c.content_hash());
    assert_eq!(a.sweep_key(), c.sweep_key());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = trivial("det", 0.25);
    v["psi1"] = json!({"kind": "exponential", "amplitude": 0.1, "rate": 2.0});
    let s = scenario(v);
    let mut o = opts(&dir);
    run_scenario(&s, &o).unwrap();
    let read = |f: &str| fs::read(dir.path().join("det").join(f)).unwrap();
    let first: Vec<Vec<u8>> = ["grid.csv", "solver_report.json", "manifest.json"].map(read).to_vec();
    o.use_cache = false;
    run_scenario(&s, &o).unwrap();
    let second: Vec<Vec<u8>> = ["grid.csv", "solver_report.json", "manifest.json"].map(read).to_vec();
    assert_eq!(first, second);
}

#[test]
fn cache_hit_skips_the_solve() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario(trivial("cache", 0.5));
    let m1 = run_scenario(&s, &opts(&dir)).unwrap();
    let grid = dir.path().join("cache/grid.csv");
    let stamp = fs::metadata(&grid).unwrap().modified().unwrap();
    let m2 = run_scenario(&s, &opts(&dir)).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(fs::metadata(&grid).unwrap().modified().unwrap(), stamp);
}

#[test]
fn numerical_failure_is_persisted() {
    let mut v = trivial("fail", 0.25);
    v["psi1"] = json!({"kind": "exponential", "amplitude": 0.1, "rate": 2.0});
    v["tolerances"] = json!({"max_iters": 1, "newton": 1e-14});
    let dir = tempfile::tempdir().unwrap();
    let err = run_scenario(&scenario(v), &opts(&dir)).unwrap_err();
    assert!(!err.is_validation());
    let m: RunManifest = serde_json::from_str(&fs::read_to_string(dir.path().join("fail/manifest.json")).unwrap()).unwrap();
    assert!(matches!(m.status, RunStatus::Failed { .. }));
}

#[test]
fn empty_batch() {
    let dir = tempfile::tempdir().unwrap();
    let s = batch(&[], &opts(&dir)).unwrap();
    assert!(s.rows.is_empty() && s.all_passed());
}

#[test]
fn batch_isolates_failures() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = trivial("b-bad", 0.5);
    bad["grid"]["n_rho"] = json!(2);
    let list = vec![scenario(trivial("c-ok", 0.5)), scenario(bad), scenario(trivial("a-ok", 0.25))];
    let s = batch(&list, &opts(&dir)).unwrap();
    assert_eq!(s.rows.len(), 3);
    assert_eq!(s.failures, 1);
    let ids: Vec<&str> = s.rows.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["a-ok", "b-bad", "c-ok"]);
    assert_eq!(s.rows[1].status, RowStatus::Failed);
    assert!(dir.path().join("c-ok/grid.csv").is_file());
    let mut csv = Vec::new();
    s.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 3 + 1);
}

#[test]
fn duplicate_ids_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let list = vec![scenario(trivial("x", 0.5)), scenario(trivial("x", 0.25))];
    assert!(batch(&list, &opts(&dir)).is_err());
}

#[test]
fn sweep_of_seven_gives_a_uniformity_row() {
    let dir = tempfile::tempdir().unwrap();
    let list: Vec<Scenario> = (0..7)
        .map(|i| {
            let mut v = trivial(&format!("sweep-{i}"), 0.5f64.powi(i));
            v["psi1"] = json!({"kind": "exponential", "amplitude": 0.1, "rate": 2.0});
            scenario(v)
        })
        .collect();
    let s = batch(&list, &opts(&dir)).unwrap();
    assert_eq!(s.failures, 0, "{:?}", s.rows);
    assert_eq!(s.sweeps.len(), 1);
    let row = &s.sweeps[0];
    assert_eq!(row.members.len(), 7);
    assert_eq!(row.epsilons[0], 1.0);
    assert!(row.uniform && row.ordered, "{row:?}");
}

#[test]
fn eguchi_hanson_convexity_scenario() {
    let v = json!({
        "id": "eh-convexity",
        "n": 2, "k": 2, "tau_min": 1.0,
        "psi0": {"kind": "zero"},
        "psi1": {"kind": "gaussian", "amplitude": 0.2, "center": 1.0, "width": 1.0},
        "epsilon": 0.5,
        "grid": {"n_rho": 81, "n_t": 33, "rho_min": -3.0, "rho_max": 7.0},
        "tolerances": {"newton": 1e-10, "fd": 0.1},
        "analyses": {"energy": true, "intersections": true}
    });
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&scenario(v), &opts(&dir)).unwrap();
    assert!(m.checks["convexity"].pass, "{:?}", m.checks);
    assert!(m.checks["identity"].pass);
    assert!(m.checks["certificate"].pass && m.checks["oracle"].pass);
    assert!(dir.path().join("eh-convexity/energy.csv").is_file());
}
