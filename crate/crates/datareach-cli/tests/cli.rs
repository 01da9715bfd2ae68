use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_datareach"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn data_lines(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn selftest_passes_and_detects_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["selftest"], dir.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let out = String::from_utf8_lossy(&ok.stdout);
    assert!(out.contains("[PASS]") && !out.contains("[FAIL]"));
    let bad = run(&["selftest", "--corrupt-golden"], dir.path());
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("[FAIL]"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["reach", "--config", "nope.toml"], dir.path());
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
    let cfg = write_config(dir.path(), "system = \"unicycle\"\n[reach]\nbogus = 1\n");
    assert_eq!(code(&run(&["reach", "--config", &cfg], dir.path())), 2);
    let cfg = write_config(dir.path(), "system = \"pendulum\"\n");
    assert_eq!(code(&run(&["control", "--config", &cfg], dir.path())), 2);
}

#[test]
fn reach_writes_the_tube() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reach", "--out", "a"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_lines(&dir.path().join("a/tube.csv")), 200);
    assert!(data_lines(&dir.path().join("a/trajectory.csv")) > 0);

    let cfg = write_config(dir.path(), "[reach]\nsteps = 0\n");
    let o = run(&["reach", "--config", &cfg, "--out", "b"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_lines(&dir.path().join("b/tube.csv")), 1);
}

#[test]
fn oversized_step_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[reach]\ndt = 0.5\nenclosure = \"explicit\"\n");
    let o = run(&["reach", "--config", &cfg], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn control_reports_reaching() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["control", "--out", "a"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&dir.path().join("a"));
    assert_eq!(s["reached"], true);
    assert_eq!(s["system"], "unicycle");
    assert_eq!(data_lines(&dir.path().join("a/steps.csv")) as u64, s["steps"].as_u64().unwrap());

    let cfg = write_config(dir.path(), "[control]\nmax_steps = 0\n");
    let o = run(&["control", "--config", &cfg, "--out", "b"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&dir.path().join("b"));
    assert_eq!(s["reached"], false);
    assert_eq!(s["steps"], 0);
}

fn without_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            [&c[..6], &c[8..]].concat().join(",")
        })
        .collect()
}

#[test]
fn benchmark_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[benchmark]\nsystems = [\"unicycle\", \"aircraft\"]\nmodes = [\"idealistic\"]\nseeds = [1, 2]\nmax_steps = 5\n",
    );
    let a = run(&["benchmark", "--config", &cfg, "--out", "a"], dir.path());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_datareach"))
        .args(["benchmark", "--config", &cfg, "--out", "b"])
        .env("DATAREACH_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&b), 0);
    let read = |d: &str| fs::read_to_string(dir.path().join(d).join("benchmark.csv")).unwrap();
    let (ta, tb) = (without_timing(&read("a")), without_timing(&read("b")));
    assert_eq!(ta.len(), 5);
    assert_eq!(ta, tb);
    assert!(dir.path().join("a/benchmark.json").exists());
}
