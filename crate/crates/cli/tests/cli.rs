use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const DIST: &str = r#"{"marginal": {"kind": "uniform"},
 "eta": {"kind": "logistic", "w": [4.0, -4.0], "b": 0.0},
 "box": {"lower": [0.0, 0.0], "upper": [1.0, 1.0]}}"#;

const CONFIG: &str = r#"{"region": {"kind": "ball", "center": [0.3, 0.7], "radius": 0.25},
 "costs": {"c_plus": 1.0, "c_minus": 1.0, "c_hat": 4.0}}"#;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_utilisvm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn setup() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("dist.json"), DIST).unwrap();
    fs::write(dir.path().join("kc.json"), CONFIG).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn synth_is_deterministic() {
    let dir = setup();
    let p = dir.path();
    for out in ["a.csv", "b.csv"] {
        let o = bin(p, &["synth", "--dist", "dist.json", "--m", "1000", "--seed", "7", "--out", out]);
        assert!(o.status.success());
    }
    let a = fs::read(p.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(p.join("b.csv")).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("x0,x1,y\n"));
}

#[test]
fn synth_train_predict_round_trip() {
    let dir = setup();
    let p = dir.path();
    assert!(bin(p, &["synth", "--dist", "dist.json", "--m", "200", "--seed", "3", "--out", "d.csv"]).status.success());
    let train = [
        "train", "--data", "d.csv", "--config", "kc.json", "--C", "10", "--kernel", "gaussian", "--sigma", "0.5",
        "--seed", "4",
    ];
    let o = bin(p, &[&train[..], &["--out", "m1.json"]].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("converged=true"));
    assert!(bin(p, &[&train[..], &["--out", "m2.json"]].concat()).status.success());
    assert_eq!(fs::read(p.join("m1.json")).unwrap(), fs::read(p.join("m2.json")).unwrap());

    let o = bin(p, &["predict", "--model", "m1.json", "--data", "d.csv", "--out", "p.csv"]);
    assert!(o.status.success());
    let preds = fs::read_to_string(p.join("p.csv")).unwrap();
    assert_eq!(preds.lines().count(), 201);
    assert_eq!(preds.lines().next(), Some("f,label"));
    let again = bin(p, &["predict", "--model", "m2.json", "--data", "d.csv"]);
    assert_eq!(stdout(&again), preds);

    let o = bin(p, &["eval", "--model", "m1.json", "--dist", "dist.json", "--config", "kc.json", "--nodes", "32"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["utility_gap"].as_f64().unwrap() >= 0.0);
}

#[test]
fn check_theory_reports_zero_violations() {
    let dir = setup();
    let o = bin(
        dir.path(),
        &["check-theory", "--dist", "dist.json", "--config", "kc.json", "--n", "100", "--seed", "1", "--nodes", "32"],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("violations=0"));
}

#[test]
fn converge_and_compare_write_reports() {
    let dir = setup();
    let p = dir.path();
    let plan = serde_json::json!({
        "distribution": serde_json::from_str::<serde_json::Value>(DIST).unwrap(),
        "costs": {"c_plus": 1.0, "c_minus": 1.0, "c_hat": 4.0},
        "region": {"kind": "ball", "center": [0.3, 0.7], "radius": 0.25},
        "kernel": {"kind": "gaussian", "params": {"sigma": 0.2}},
        "gamma": 0.5,
        "m_grid": [30, 60],
        "repetitions": 2,
        "base_seed": 11,
        "quadrature": {"nodes_per_axis": 16}
    });
    fs::write(p.join("plan.json"), plan.to_string()).unwrap();
    for out in ["a.csv", "b.csv"] {
        assert!(bin(p, &["converge", "--plan", "plan.json", "--out", out]).status.success());
    }
    let a = fs::read_to_string(p.join("a.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(p.join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 5);
    assert!(a.starts_with("variant,m,rep,seed,C,gap,utility,u_fq,emp_error,norm,norm_bound,theory_bound,converged\n"));

    let o = bin(p, &["compare", "--plan", "plan.json", "--variants", "standard,knowledge", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);
    assert_eq!(v["rows"][0]["variant"], "knowledge");
}

#[test]
fn exit_codes() {
    let dir = setup();
    let p = dir.path();
    assert_eq!(bin(p, &["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(bin(p, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(p, &["--help"]).status.code(), Some(0));

    fs::write(p.join("bad.csv"), "x0,x1,y\n0.1,0.2,0\n").unwrap();
    let o = bin(p, &["train", "--data", "bad.csv", "--C", "1", "--variant", "standard", "--out", "m.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    fs::write(p.join("empty.csv"), "x0,x1,y\n").unwrap();
    let o = bin(p, &["train", "--data", "empty.csv", "--C", "1", "--variant", "standard", "--out", "m.json"]);
    assert_eq!(o.status.code(), Some(1));

    let o = bin(p, &["compare", "--variants", "svm"]);
    assert_eq!(o.status.code(), Some(1));

    assert!(bin(p, &["synth", "--dist", "dist.json", "--m", "100", "--seed", "1", "--out", "d.csv"]).status.success());
    let o = bin(
        p,
        &["train", "--data", "d.csv", "--config", "kc.json", "--C", "10", "--max-passes", "1", "--out", "m.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(p.join("m.json").exists());

    let o = Command::new(env!("CARGO_BIN_EXE_utilisvm"))
        .args(["synth", "--dist", "dist.json", "--m", "5", "--out", "x.csv"])
        .current_dir(p)
        .env("UTILISVM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_utilisvm"))
        .args(["synth", "--dist", "dist.json", "--m", "5", "--out", "x.csv"])
        .current_dir(p)
        .env("UTILISVM_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}
