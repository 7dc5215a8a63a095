use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quasirand"));
    c.env_remove("QUASIRAND_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn count_triangles_in_k4() {
    let dir = TempDir::new().unwrap();
    let k4 = write(&dir, "k4.txt", "4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let o = run(&["count", "--pattern", "clique:3", "--graph", s(&k4)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "24");

    let o = run(&["count", "--pattern", "path3", "--graph", s(&k4), "--mode", "induced"]);
    assert_eq!(stdout(&o).trim(), "0");

    let o = run(&["count", "--pattern", "path3", "--graph", s(&k4), "--mode", "tuple", "--sets", "0;1;2"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn pattern_from_file() {
    let dir = TempDir::new().unwrap();
    let tri = write(&dir, "tri.txt", "3\n0 1\n0 2\n1 2\n");
    let k4 = write(&dir, "k4.txt", "4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let o = run(&["count", "--pattern", s(&tri), "--graph", s(&k4)]);
    assert_eq!(stdout(&o).trim(), "24");
}

#[test]
fn conjugate_of_path3_at_half() {
    let o = run(&["conjugate", "--pattern", "path3", "--p", "0.5"]);
    assert!(o.status.success());
    let line = stdout(&o).lines().find(|l| l.starts_with("p_bar ")).unwrap().to_string();
    let got: f64 = line["p_bar ".len()..].parse().unwrap();
    assert!((got - (1.0 + 5f64.sqrt()) / 4.0).abs() < 1e-11);
}

#[test]
fn hub_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let hub = dir.path().join("hub6.txt");
    let o = run(&["gen", "--kind", "hub_weighted", "--r", "6", "--pattern", "cycle4", "--p", "0.3", "--out", s(&hub)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&["reconstruct", "--pattern", "cycle4", "--p", "0.3", "--weights", s(&hub), "--expect", "HUB"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_of(&o);
    assert_eq!(v["results"]["verdict"], "HUB_PBAR");
    let at_pbar = v["results"]["labels"].as_array().unwrap().iter().filter(|l| *l == "AT_PBAR").count();
    assert_eq!(at_pbar, 5);

    let o = run(&["reconstruct", "--pattern", "cycle4", "--p", "0.3", "--weights", s(&hub), "--expect", "UNIFORM_P"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn input_errors_exit_2_with_line_numbers() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "3\n0 1\n2 2\n");
    let o = run(&["count", "--pattern", "path3", "--graph", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = run(&["gen", "--kind", "nonsense", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["conjugate", "--pattern", "path3", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["reconstruct", "--pattern", "cycle4", "--p", "0.3", "--weights", "/nonexistent", "--eps", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

fn strip_clock(mut v: Value) -> Value {
    let meta = v["meta"].as_object_mut().unwrap();
    assert!(meta.remove("wall_clock_seconds").is_some());
    assert!(meta.remove("started_unix_ms").is_some());
    v
}

#[test]
fn reports_reproduce_and_record_seed() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    assert!(run(&["gen", "--kind", "gnp", "--n", "40", "--p", "0.5", "--seed", "3", "--out", s(&g)]).status.success());
    let args = ["props", "--graph", s(&g), "--p", "0.5", "--pattern", "path3", "--samples", "50"];
    let a = bin().args(args).env("QUASIRAND_SEED", "11").output().unwrap();
    let b = bin().args(args).env("QUASIRAND_SEED", "11").output().unwrap();
    let (a, b) = (strip_clock(json_of(&a)), strip_clock(json_of(&b)));
    assert_eq!(a, b);
    assert_eq!(a["meta"]["seed"], 11);
    assert_eq!(a["meta"]["config"]["command"]["name"], "props");
    let keys: Vec<&String> = a.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["meta", "input", "results"]);
    let props = a["results"]["properties"].as_array().unwrap();
    assert_eq!(props.len(), 7);
    assert!(props.iter().all(|p| p["deviation"].is_string()));
}

#[test]
fn lemma_suites_pass() {
    let o = run(&["lemmas", "--suite", "classify", "--n-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("classify     PASS"));
    let o = run(&["lemmas", "--suite", "counting"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn analyze_random_graph_end_to_end() {
    let dir = TempDir::new().unwrap();
    let g = dir.path().join("g.txt");
    assert!(run(&["gen", "--kind", "gnp", "--n", "300", "--p", "0.5", "--seed", "1", "--out", s(&g)]).status.success());
    let report = dir.path().join("report.json");
    let o = run(&["analyze", "--graph", s(&g), "--pattern", "path3", "--p", "0.5", "--expect", "P_QUASI", "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["results"]["verdict"], "P_QUASI");
    assert!(v["results"]["partition_deviation"].as_str().unwrap().contains("random equipartition"));

    let o = run(&["analyze", "--graph", s(&g), "--pattern", "path3", "--p", "0.5", "--expect", "INCONCLUSIVE", "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(1));
}
