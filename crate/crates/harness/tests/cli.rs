use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use l3blind_harness::report::read_jsonl;

fn l3blind(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l3blind")).args(args).current_dir(dir).output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL: &str = r#"{
    "k_users": 2, "t_len": 40, "n_h": 8, "n_v": 4, "trials": 3,
    "sweep": {"axis": "snr_db", "values": [5.0, 25.0]},
    "concentration": {"k_list": [4], "c_list": [0.416], "t_list": [20, 200], "delta2": 0.1, "trials": 50},
    "convergence": {"k_users": 2, "m": 64, "t_len": 40, "theta": 0.2, "sigma2": 0.01, "target": 0.9}
}"#;

#[test]
fn simulate_then_report_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out =
        l3blind(&["simulate", "--config", &cfg, "--out", "run", "--methods", "l3,pilot", "--seed", "5"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = tmp.path().join("run");

    let records = read_jsonl(&run.join("trials.jsonl")).unwrap();
    assert_eq!(records.len(), 2 * 3 * 2);
    assert!(records.iter().all(|r| r.error.is_none()));

    let summary = fs::read_to_string(run.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), "method,sweep_axis,sweep_value,metric,n,failures,mean,median,ci_low,ci_high");
    assert!(lines.any(|l| l.starts_with("pilot,snr_db,25,rate_training,3,")));

    let plot = fs::read_to_string(run.join("plot_evm_l3.dat")).unwrap();
    assert!(plot.starts_with('#'));
    let rows: Vec<Vec<f64>> = plot
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], 5.0);
    assert!(rows.iter().all(|r| r.len() == 3));

    fs::remove_file(run.join("summary.csv")).unwrap();
    let out = l3blind(&["report", "--out", "run"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(run.join("summary.csv")).unwrap(), summary);
}

#[test]
fn concentration_and_convergence_write_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = l3blind(&["concentration", "--config", &cfg, "--out", "conc"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let plot = fs::read_to_string(tmp.path().join("conc/plot_concentration_k4.dat")).unwrap();
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 2);

    let out = l3blind(&["convergence", "--config", &cfg, "--out", "conv", "--trials", "2"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for label in ["base", "half_theta", "half_k", "half_m", "tenth_noise"] {
        assert!(tmp.path().join(format!("conv/plot_convergence_{label}.dat")).exists(), "{label}");
    }
}

#[test]
fn hard_errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(tmp.path(), r#"{"k_userz": 4}"#);
    let out = l3blind(&["simulate", "--config", &unknown, "--out", "x"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = l3blind(&["simulate", "--config", "missing.json"], tmp.path());
    assert!(!out.status.success());

    let out = l3blind(&["simulate", "--methods", "l3,l5", "--out", "x"], tmp.path());
    assert!(!out.status.success());

    let out = l3blind(&["report", "--out", "nowhere"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("trials.jsonl"));
}

#[test]
fn precondition_flag_reaches_the_solver() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"k_users": 2, "t_len": 30, "n_h": 4, "n_v": 4, "trials": 2}"#);
    let run = |pre: &str, dir: &str| {
        let out = l3blind(&["simulate", "--config", &cfg, "--out", dir, "--precondition", pre], tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        read_jsonl(&tmp.path().join(dir).join("trials.jsonl")).unwrap()
    };
    let (on, off) = (run("true", "on"), run("false", "off"));
    assert_ne!(on[0].fingerprint, off[0].fingerprint);
    assert_eq!(on[0].seed, off[0].seed);
}
