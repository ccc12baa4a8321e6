use std::path::Path;
use std::process::{Command, Output};

fn starfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starfd")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_both_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"scheme": ["star-fd", "star-hd"], "M": 4, "r_u_th": 1, "r_d_th": 2, "seeds": 2}"#,
    );
    let out = dir.path().join("out");
    let res = starfd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 5);
    assert!(summary.starts_with("scheme,sweep_param,sweep_value,seed,"));
    assert!(out.join("trace.csv").exists() && out.join("config.json").exists());
}

#[test]
fn bad_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"scheme": "star-fd", "M": 0, "r_u_th": 1, "r_d_th": 2, "seeds": 2}"#);
    let res = starfd(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let missing = dir.path().join("nope.json");
    let res = starfd(&["run", "--config", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn failed_runs_exit_2_after_writing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"scheme": "con-fd", "M": 2, "r_u_th": 1, "r_d_th": 6, "seeds": 2, "channel": {"si_pathloss_db": 0}}"#,
    );
    let out = dir.path().join("out");
    let res = starfd(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn figure_ids_outside_2_to_5_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let res = starfd(&["figure", "--id", "7", "--seeds", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(!dir.path().join("summary.csv").exists());
    assert_eq!(starfd(&["figure", "--out", "x"]).status.code(), Some(1));
}
