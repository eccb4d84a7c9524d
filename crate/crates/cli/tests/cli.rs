use std::path::Path;
use std::process::{Command, Output};

fn enflo(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_enflo"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn params_prints_selection() {
    let out = enflo(&["params", "--n", "1", "--p", "2"], &[]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!((v["m"].as_u64(), v["k"].as_u64()), (Some(12), Some(5)));
    assert_eq!(enflo(&["params", "--n", "1", "--p", "3"], &[]).status.code(), Some(2));
}

#[test]
fn verify_writes_report_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "v.toml", "task = \"verify_theorem\"\np = 2.0\nn = 2\nm = 4\ntrials = 8\n");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let run = |out: &Path, threads: &str| {
        enflo(&["verify", "--config", &cfg, "--seed", "17", "--out", out.to_str().unwrap()], &[("ENFLO_THREADS", threads)])
    };
    assert_eq!(run(&a, "1").status.code(), Some(0));
    assert_eq!(run(&b, "3").status.code(), Some(0));
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v["wall_clock_seconds"] = 0.into();
        v["config"]["output_path"] = serde_json::Value::Null;
        v
    };
    let (ra, rb) = (strip(&a), strip(&b));
    assert_eq!(ra, rb);
    assert_eq!(ra["seed"], 17);
    assert_eq!(ra["verdict"], "pass");
}

#[test]
fn report_goes_to_stdout_without_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "o.toml", "task = \"oracle\"\np = 1.0\nn = 1\nm = 4\nalphabet = [0.0, 1.0]\n");
    let out = enflo(&["oracle", "--config", &cfg, "--format", "csv"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("trial_id,kind,lhs,rhs,constant,margin,status"));
    assert!(text.contains("oracle,0.5,5,0.5,4.5,pass"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let odd = config(dir.path(), "odd.toml", "task = \"estimate_tau\"\np = 1.0\nn = 1\nm = 5\n");
    let out = enflo(&["estimate", "--config", &odd], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));

    let cx = config(
        dir.path(),
        "cx.toml",
        "task = \"verify_theorem\"\np = 2.0\nn = 1\nm = 8\ntrials = 4\nreference_t = 0.01\n",
    );
    assert_eq!(enflo(&["verify", "--config", &cx], &[]).status.code(), Some(1));
    assert_eq!(enflo(&["verify", "--config", &cx, "--cap", "4"], &[]).status.code(), Some(3));
    assert_eq!(enflo(&["witness", "--config", &cx], &[]).status.code(), Some(2));
    assert_eq!(enflo(&["verify", "--config", &cx], &[("ENFLO_THREADS", "zero")]).status.code(), Some(2));
    assert_eq!(enflo(&["verify"], &[]).status.code(), Some(2));
}
