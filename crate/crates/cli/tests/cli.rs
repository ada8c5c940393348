use std::process::{Command, Output};

use serde_json::Value;

fn fundlim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fundlim"))
        .args(args)
        .env_remove("FUNDLIM_SEED")
        .output()
        .unwrap()
}

fn record(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn fano_prints_a_holding_record() {
    let out = fundlim(&["fano"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = record(&out);
    assert_eq!(r["verdict"], "holds");
    assert_eq!(r["config"]["experiment"], "fano");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn bad_config_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"noise_variance": -1.0}"#).unwrap();
    let out = fundlim(&["meta-verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise_variance"));

    std::fs::write(&path, r#"{"no_such_field": 1}"#).unwrap();
    let out = fundlim(&["meta-verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_field"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(fundlim(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(fundlim(&["fano", "--trials", "x"]).status.code(), Some(1));
    assert_eq!(fundlim(&["fano", "--trials", "1"]).status.code(), Some(1));
    assert_eq!(fundlim(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_config_file_exits_one() {
    assert_eq!(fundlim(&["fano", "--config", "/nonexistent/cfg.json"]).status.code(), Some(1));
}

#[test]
fn out_writes_record_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("runs").join("div.json");
    let out = fundlim(&["divergence", "--trials", "50", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["config"]["trials"], 50);
    let csvs: Vec<_> = std::fs::read_dir(path.parent().unwrap())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".csv"))
        .collect();
    assert!(!csvs.is_empty());
}

#[test]
fn seed_precedence_is_flag_then_env_then_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"base_seed": 5, "trials": 20}"#).unwrap();
    let cfg = path.to_str().unwrap();
    let seed = |envv: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_fundlim"));
        c.args(["pe", "--config", cfg]).env_remove("FUNDLIM_SEED");
        if let Some(v) = envv {
            c.env("FUNDLIM_SEED", v);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        let out = c.output().unwrap();
        record(&out)["config"]["base_seed"].as_u64().unwrap()
    };
    assert_eq!(seed(None, None), 5);
    assert_eq!(seed(Some("7"), None), 7);
    assert_eq!(seed(Some("7"), Some("9")), 9);
}

#[test]
fn payload_does_not_depend_on_workers() {
    let one = record(&fundlim(&["meta-verify", "--trials", "200", "--workers", "1"]));
    let four = record(&fundlim(&["meta-verify", "--trials", "200", "--workers", "4"]));
    assert_eq!(one["payload"], four["payload"]);
    assert_eq!(one["verdict"], four["verdict"]);
}
