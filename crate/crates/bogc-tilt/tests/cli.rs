use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bogc-tilt"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(config: &Path, out: &Path, threads: Option<&str>) -> Output {
    let mut c = bin();
    c.args(["run", "--config"]).arg(config).arg("--out").arg(out);
    match threads {
        Some(t) => c.env("BOGC_TILT_THREADS", t),
        None => c.env_remove("BOGC_TILT_THREADS"),
    };
    c.output().unwrap()
}

#[test]
fn list_suites_and_version() {
    let o = bin().arg("list-suites").output().unwrap();
    assert!(o.status.success());
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(str::to_string).collect();
    assert_eq!(names, ["bogc", "tilted", "bialternant", "cauchy-binet", "flows", "closure", "airy"]);
    let o = bin().arg("version").output().unwrap();
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("bogc-tilt "));
}

#[test]
fn minimal_bogc_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"suite":"bogc","symbol":{"type":"exponential","times":[0.3]}}"#);
    let out = dir.path().join("r.json");
    let o = run(&cfg, &out, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.is_ascii() && text.ends_with('\n'));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["environment"]["seed"], 0);
    let checks = v["suites"][0]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 8);
    assert!(checks.iter().all(|c| c["pass"] == true && c["M"] == 128));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cfg = write_config(dir.path(), "bad.json", r#"{"suite":"bogc","tiltz":[]}"#);
    let o = run(&cfg, &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tiltz"));
    let cfg = write_config(dir.path(), "rat.json", r#"{"symbol":{"type":"rational","minus":[1.5]}}"#);
    let o = run(&cfg, &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("symbol.minus[0]"));
    let o = run(&dir.path().join("missing.json"), &out, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn failing_check_writes_report_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"suite":"closure","closure":{"expected":[0,0],"samples":40}}"#);
    let out = dir.path().join("r.json");
    let o = run(&cfg, &out, None);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert!(v["suites"][0]["checks"][0]["spectra"].is_object());
}

#[test]
fn empty_selection_is_an_empty_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"suite":[]}"#);
    let out = dir.path().join("r.json");
    assert_eq!(run(&cfg, &out, None).status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["suites"], Value::Array(vec![]));
    assert_eq!(v["pass"], true);
}

#[test]
fn suite_flag_overrides_config_and_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"suite":"bogc","seed":42,"tilted":{"families":3}}"#);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let mut c = bin();
    c.args(["run", "--config"]).arg(&cfg).arg("--out").arg(&a);
    c.args(["--suite", "tilted", "--suite", "cauchy-binet"]).env("BOGC_TILT_THREADS", "1");
    assert_eq!(c.output().unwrap().status.code(), Some(0));
    let mut c = bin();
    c.args(["run", "--config"]).arg(&cfg).arg("--out").arg(&b);
    c.args(["--suite", "tilted", "--suite", "cauchy-binet"]).env("BOGC_TILT_THREADS", "3");
    assert_eq!(c.output().unwrap().status.code(), Some(0));
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let v: Value = serde_json::from_slice(&ta).unwrap();
    let names: Vec<&str> = v["suites"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["tilted", "cauchy-binet"]);
    assert_eq!(v["environment"]["seed"], 42);
}

#[test]
fn configured_tilts_reach_the_tilted_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"suite":"tilted","symbol":{"type":"exponential","times":[0.3]},
            "tilts":{"xi":[[1.0],[0.0,1.0]],"theta":[[1.0],[1.0,-0.5]]}}"#,
    );
    let out = dir.path().join("r.json");
    assert_eq!(run(&cfg, &out, None).status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let names: Vec<&str> = v["suites"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["exp(0.3)/N=2/configured", "exp(0.3)/N=2/configured/rank", "exp(0.3)/N=2/degenerate"]);
}
