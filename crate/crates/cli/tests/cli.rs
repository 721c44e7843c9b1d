use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dpmirror"))
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    p
}

fn run(config: &Path, out: &Path) -> Output {
    bin().args(["run", "--config"]).arg(config).arg("--out").arg(out).arg("--jobs").arg("2").output().unwrap()
}

fn game_config(algorithm: &str, mode: &str, n: Vec<usize>) -> Value {
    json!({
        "schema_version": 1,
        "problem": {"kind": "random_game", "dx": 4, "dy": 3, "noise": 0.5, "seed": 3},
        "algorithm": algorithm,
        "mode": mode,
        "epsilon": 1.0,
        "delta": 1e-5,
        "n_grid": n,
        "trials": 2,
        "master_seed": 11
    })
}

fn rows(out: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(out).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &game_config("smd_vertex", "second_order", vec![2000, 8000]));
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run(&cfg, &a).status.success());
    let single = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&b).env("DPMIRROR_JOBS", "1").output().unwrap();
    assert!(single.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["master_seed"], 11);
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(rows(&a).len(), 4);
}

#[test]
fn every_algorithm_produces_valid_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("smd_vertex", "first_order", 5_000, None),
        ("smd_bias_reduced", "second_order", 50_000, None),
        ("nonprivate_smd", "quadratic", 2_000, None),
        ("boosted", "second_order", 400_000, Some(json!({"candidates": 2, "responses": 1}))),
    ];
    for (alg, mode, n, boost) in cases {
        let mut v = game_config(alg, mode, vec![n]);
        if let Some(b) = boost {
            v["boost"] = b;
        }
        let cfg = write_config(dir.path(), &format!("{alg}.json"), &v);
        let out = dir.path().join(format!("{alg}.csv"));
        let o = run(&cfg, &out);
        assert!(o.status.success(), "{alg}: {}", String::from_utf8_lossy(&o.stderr));
        for r in rows(&out) {
            assert_eq!(&r[2], alg);
            assert_eq!(&r[4], "gap");
            let gap: f64 = r[5].parse().unwrap();
            assert!(gap.is_finite() && gap >= -1e-12);
            let used: usize = r[7].parse().unwrap();
            assert!(used <= n);
            let plan: Value = serde_json::from_str(&r[12]).unwrap();
            assert!(plan.is_object());
        }
    }

    let sco = json!({
        "schema_version": 1,
        "problem": {"kind": "separable_quadratic", "dim": 10, "sigma": 0.2, "seed": 1},
        "algorithm": "dp_sco", "mode": "second_order", "epsilon": 1.0, "delta": 1e-5,
        "n_grid": [5000], "trials": 2, "master_seed": 1
    });
    let cfg = write_config(dir.path(), "sco.json", &sco);
    let out = dir.path().join("sco.csv");
    assert!(run(&cfg, &out).status.success());
    for r in rows(&out) {
        assert_eq!(&r[4], "excess_risk");
        assert!(r[5].parse::<f64>().unwrap() >= -1e-12);
    }

    let ml = json!({
        "schema_version": 1,
        "problem": {"kind": "max_loss", "dim": 5, "components": 3, "sigma": 0.1, "seed": 2},
        "algorithm": "smd_vertex", "mode": "second_order", "epsilon": 1.0, "delta": 1e-5,
        "n_grid": [5000], "trials": 1, "master_seed": 1, "gap_inner_steps": 2000
    });
    let cfg = write_config(dir.path(), "ml.json", &ml);
    let out = dir.path().join("ml.csv");
    assert!(run(&cfg, &out).status.success());
    let r = &rows(&out)[0];
    assert!(r[6].parse::<f64>().unwrap() > 0.0, "general gap reports an inner error bound");
}

#[test]
fn budget_errors_exit_three_without_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = game_config("smd_vertex", "quadratic", vec![1000]);
    v["epsilon"] = json!(8.0 * 1e5f64.ln() + 1.0);
    let cfg = write_config(dir.path(), "c.json", &v);
    let out = dir.path().join("o.csv");
    assert_eq!(run(&cfg, &out).status.code(), Some(3));
    assert!(!out.exists());

    let mut v = game_config("smd_vertex", "quadratic", vec![1000]);
    v["overrides"] = json!({"tau": 10.0});
    let cfg = write_config(dir.path(), "o.json", &v);
    assert_eq!(run(&cfg, &out).status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&bad, &out).status.code(), Some(2));
    let mut v = game_config("smd_vertex", "quadratic", vec![1000]);
    v["overrides"] = json!({"q": 4});
    let cfg = write_config(dir.path(), "c.json", &v);
    assert_eq!(run(&cfg, &out).status.code(), Some(2));
    let o = bin().args(["verify", "--suite", "nope", "--reps", "10", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn binary_game_files_and_dataset_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = b"DPMG".to_vec();
    bytes.extend(1u32.to_le_bytes());
    bytes.extend(2u64.to_le_bytes());
    bytes.extend(2u64.to_le_bytes());
    for v in [1.0f64, -1.0, -1.0, 1.0] {
        bytes.extend(v.to_le_bytes());
    }
    std::fs::write(dir.path().join("pennies.bin"), &bytes).unwrap();
    let v = json!({
        "schema_version": 1,
        "problem": {"kind": "matrix_game", "payoff_file": "pennies.bin"},
        "algorithm": "nonprivate_smd", "mode": "quadratic", "epsilon": 1.0, "delta": 1e-5,
        "n_grid": [10000], "trials": 1, "master_seed": 0
    });
    let cfg = write_config(dir.path(), "c.json", &v);
    let out = dir.path().join("o.csv");
    assert!(run(&cfg, &out).status.success());
    let gap: f64 = rows(&out)[0][5].parse().unwrap();
    assert!(gap < 0.05, "{gap}");

    std::fs::write(dir.path().join("pennies.bin"), &bytes[..30]).unwrap();
    assert_eq!(run(&cfg, &dir.path().join("p.csv")).status.code(), Some(4));
}

fn synth_config(dir: &Path, n: usize) -> PathBuf {
    let data: String = (0..2000).map(|i| format!("{}\n", (i * 7) % 5 % 3)).collect();
    std::fs::write(dir.join("data.csv"), data).unwrap();
    let v = json!({
        "schema_version": 1,
        "problem": {
            "kind": "synth_data", "domain": 4, "symmetric": true, "data_file": "data.csv",
            "queries": [[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1]]
        },
        "algorithm": "smd_vertex", "mode": "quadratic", "epsilon": 2.0, "delta": 1e-5,
        "n_grid": [n], "trials": 1, "master_seed": 5
    });
    write_config(dir, "s.json", &v)
}

#[test]
fn synth_writes_a_categorical_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synth_config(dir.path(), 2000);
    let out = dir.path().join("synthetic.csv");
    let o = bin().args(["synth", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let ids: Vec<usize> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(ids.len(), 2000);
    assert!(ids.iter().all(|&z| z < 4));
    let meta: Value = serde_json::from_slice(&std::fs::read(dir.path().join("synthetic.csv.meta.json")).unwrap()).unwrap();
    let err = meta["max_query_error"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&err));

    // The same problem also runs through the experiment runner.
    let o = run(&cfg, &dir.path().join("r.csv"));
    assert!(o.status.success());

    let cfg = synth_config(dir.path(), 5000);
    let o = bin().args(["synth", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_flags_low_repetitions_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let go = |out: &Path| bin().args(["verify", "--suite", "value_bias", "--reps", "10", "--out"]).arg(out).output().unwrap();
    let o = go(&a);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    go(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(report["total"], 1);
    assert!(report["suites"][0]["warning"].is_string());
}

#[test]
fn quickstart_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quickstart.json");
    let out = dir.path().join("q.csv");
    let start = std::time::Instant::now();
    assert!(run(&cfg, &out).status.success());
    assert!(start.elapsed().as_secs() < 60);
    assert_eq!(rows(&out).len(), 6);
}
