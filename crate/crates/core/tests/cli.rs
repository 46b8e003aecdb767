use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn twtsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twtsp")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = twtsp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn read(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn gen_chain(dir: &TempDir) -> (String, String, String) {
    let (i, q, m) = (p(dir, "i.json"), p(dir, "p.json"), p(dir, "m.json"));
    ok(&[
        "gen", "--kind", "chain", "--params", "s=1,k=8,c=3,n=4", "--out-instance", &i, "--out-predictions", &q,
        "--out-matching", &m,
    ]);
    (i, q, m)
}

#[test]
fn gen_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let f = p(&dir, name);
        ok(&["--seed", "7", "gen", "--kind", "random", "--params", "n=5,num_requests=4", "--out-instance", &f]);
        std::fs::read_to_string(f).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn oracle_and_offline_agree_on_chain() {
    let dir = TempDir::new().unwrap();
    let (i, _, _) = gen_chain(&dir);
    let csv = ok(&["--format", "csv", "oracle", "--instance", &i]);
    assert_eq!(csv.lines().next(), Some("value,explored_states"));
    assert!(csv.lines().nth(1).unwrap().starts_with("4,"));

    let off: Value = serde_json::from_str(&ok(&["offline", "--instance", &i])).unwrap();
    let v = off["value"].as_u64().unwrap();
    assert!((1..=4).contains(&v));
    let w = p(&dir, "w.json");
    std::fs::write(&w, off["walk"].to_string()).unwrap();
    assert!(ok(&["validate", "--instance", &i, "--walk", &w]).contains("walk"));
}

#[test]
fn simulate_reports_profile_and_branches() {
    let dir = TempDir::new().unwrap();
    let (i, q, m) = gen_chain(&dir);
    let out = p(&dir, "rep.json");
    ok(&["simulate", "--instance", &i, "--predictions", &q, "--matching", &m, "--lambda-from-matching", "--out", &out]);
    let rep = read(&out);
    assert_eq!(rep["lambda_bound"], 1);
    assert_eq!(rep["s_prime"], 3);
    assert_eq!(rep["branches"].as_array().unwrap().len(), 3);
    assert_eq!(rep["opt_value"], 4);

    let one = ok(&["--format", "csv", "simulate", "--instance", &i, "--predictions", &q, "--lambda", "1", "--epsilon", "-1"]);
    assert_eq!(one.lines().count(), 2);
    assert!(one.lines().nth(1).unwrap().starts_with("-1,"));
}

#[test]
fn bench_writes_its_files() {
    let dir = TempDir::new().unwrap();
    let suite = p(&dir, "suite.json");
    std::fs::write(
        &suite,
        r#"{"name":"t","entries":[{"label":"r","generator":{"kind":"random","n":4,"num_requests":3,
            "window_min":6,"window_max":9},"trials":3,"seed":1}]}"#,
    )
    .unwrap();
    let out_dir = p(&dir, "out");
    std::fs::create_dir(&out_dir).unwrap();
    let agg: Value = serde_json::from_str(&ok(&["bench", "--suite", &suite, "--out-dir", &out_dir])).unwrap();
    assert_eq!(agg.as_array().unwrap().len(), 2);
    for f in ["trials.csv", "reports.json", "ratio_vs_lambda.dat", "ratio_vs_logd.dat"] {
        assert!(Path::new(&out_dir).join(f).exists(), "{f}");
    }
    let csv = ok(&["--format", "csv", "bench", "--suite", &suite]);
    assert_eq!(csv.lines().filter(|l| l.starts_with("trial,")).count(), 3);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (i, q, m) = gen_chain(&dir);
    assert!(ok(&["validate", "--instance", &i, "--predictions", &q, "--matching", &m]).starts_with("ok:"));

    let bad = p(&dir, "bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(twtsp(&["oracle", "--instance", &bad]).status.code(), Some(2));
    assert_eq!(twtsp(&["validate", "--suite", &bad]).status.code(), Some(2));
    let f = p(&dir, "x.json");
    assert_eq!(twtsp(&["gen", "--kind", "random", "--params", "bogus=1", "--out-instance", &f]).status.code(), Some(2));
    assert_eq!(twtsp(&["--state-budget", "3", "oracle", "--instance", &i]).status.code(), Some(3));
    assert_eq!(twtsp(&["oracle", "--instance", &p(&dir, "missing.json")]).status.code(), Some(1));
}
