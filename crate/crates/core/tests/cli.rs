use std::fs;
use std::process::{Command, Output};

use percmatch::cli::CSV_HEADER;

fn percmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_percmatch"))
        .args(args)
        .env_remove("PERCMATCH_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn full_density_row_is_one() {
    let o = percmatch(&["--experiment", "cross-prob", "--w", "5", "--h", "5", "--p", "1", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    let fields: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&fields[..7], &["cross-prob", "G", "5", "5", "1", "100", "1"]);
    assert_eq!(fields[8], "1");
    assert_eq!(fields[9], "1");
    let lo: f64 = fields[7].parse().unwrap();
    assert!(lo > 0.9 && lo < 1.0);
}

#[test]
fn invalid_density_exits_2() {
    let o = percmatch(&["--experiment", "cross-prob", "--w", "2", "--h", "2", "--p", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside [0, 1]"));
}

#[test]
fn other_invalid_configs_exit_2() {
    for args in [
        &["--experiment", "warp-drive"][..],
        &["--experiment", "cross-prob", "--w", "2", "--h", "2", "--p", "0.5", "--samples", "10"],
        &["--experiment", "kesten-check", "--l1", "16", "--p", "0.5", "--samples", "100"],
        &["--experiment", "pc-bisect", "--n", "8"],
        &["--experiment", "nbox", "--n", "0", "--p", "0.5"],
        &["--no-such-flag"],
        &[],
    ] {
        assert_eq!(percmatch(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn duality_verify_exits_0() {
    let o = percmatch(&["--experiment", "duality-verify", "--w", "2", "--h", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.lines().nth(1).unwrap().starts_with("duality-verify/exhaustive,both,2,2,,512,1,1,1,"));
    let summary: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(summary["checks_passed"], true);
}

#[test]
fn verify_mode_runs_the_exact_suites() {
    let o = percmatch(&["--verify", "--max-sites", "12"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    for name in ["verify/duality", "verify/five-rectangles", "verify/four-rectangles", "verify/extension"] {
        assert!(csv.contains(name), "{name}");
    }
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(6) == Some("1")));
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("result.csv");
    fs::write(&cfg, "experiment = nbox\nn = 2,3\np_grid = 0.2:0.4:0.2\nsamples = 200\nseed = 9\n").unwrap();
    let o = percmatch(&["--config", cfg.to_str().unwrap(), "--seed", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("nbox,G,") && l.ends_with(",10")));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 10);
    assert_eq!(json["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn seed_from_environment() {
    let base = ["--experiment", "cross-prob", "--w", "6", "--h", "6", "--p", "0.5", "--samples", "300"];
    let env = Command::new(env!("CARGO_BIN_EXE_percmatch")).args(base).env("PERCMATCH_SEED", "42").output().unwrap();
    let flag = percmatch(&[&base[..], &["--seed", "42"]].concat());
    assert_eq!(env.stdout, flag.stdout);
    assert!(stdout(&flag).lines().nth(1).unwrap().ends_with(",42"));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["--experiment", "decomposition", "--n", "2", "--p", "0.5", "--samples", "400"];
    let a = percmatch(&[&args[..], &["--workers", "1"]].concat());
    let b = percmatch(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn each_experiment_runs() {
    for args in [
        &["--experiment", "tau-decay", "--n", "1,2,3", "--p", "0.6", "--samples", "200"][..],
        &["--experiment", "kesten-check", "--l1", "8", "--l2", "8", "--relaxed", "--p", "0.6", "--samples", "200"],
        &["--experiment", "annulus", "--inner", "2", "--outer", "6", "--p", "0.5", "--samples", "200"],
        &["--experiment", "pc-bisect", "--n", "16", "--samples", "200", "--tol", "0.01"],
        &["--experiment", "rsw-suite", "--n", "8", "--p", "0.5", "--samples", "200"],
    ] {
        let o = percmatch(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).lines().count() >= 2, "{args:?}");
    }
}
