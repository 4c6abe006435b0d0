//! The `transferlab` binary end to end: exit codes, outputs, config merging.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn transferlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transferlab")).args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = transferlab(&["run", "--experiment", "random-sum", "--replicates", "2000", "--stage", "10", "--out", out]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("ks_vs_mixture") && stdout.contains("PASS"), "{stdout}");

    let r = report(dir.path());
    for key in ["config", "seed", "checks", "runtime_seconds"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["seed"], 42);
    assert_eq!(r["config"]["experiment"], "random-sum");
    assert_eq!(r["config"]["stage"], 10);
    assert!(r["runtime_seconds"].as_f64().unwrap() >= 0.0);
    let check = &r["checks"][0];
    for key in ["name", "statistic", "critical", "pass"] {
        assert!(check.get(key).is_some(), "check missing {key}");
    }
    let csv = fs::read_to_string(dir.path().join("random_sum_ecdf.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,F_empirical,F_target,abs_diff"));
    assert_eq!(csv.lines().count(), 2001);
}

#[test]
fn failing_check_exits_two_and_still_writes_report() {
    // raw lattice counts against a Poisson limit are far from the target
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let res = transferlab(&[
        "run", "--experiment", "allocations", "--path", "sparse", "--correction", "off", "--replicates", "2000",
        "--N", "1000", "--out", out,
    ]);
    assert_eq!(res.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["checks"][0]["pass"], false);
}

#[test]
fn usage_errors_exit_one() {
    let res = transferlab(&["run", "--experiment", "bogus"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("random-sum"));

    assert_eq!(transferlab(&["run"]).status.code(), Some(1));
    assert_eq!(transferlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(transferlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    let res = transferlab(&["run", "--experiment", "psi-law", "--config", bad.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("malformed"));

    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"experiment": "psi-law", "colour": "blue"}"#).unwrap();
    assert_eq!(transferlab(&["run", "--config", unknown.to_str().unwrap()]).status.code(), Some(1));

    // r is meaningless for the random sum
    let res = transferlab(&["run", "--experiment", "random-sum", "--r", "2"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("not used"));

    let res = transferlab(&["run", "--experiment", "allocations", "--r", "1", "--path", "sparse"]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"experiment": "allocations", "seed": 5, "replicates": 300, "r": 2, "N": 500, "timing": "off"}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = transferlab(&[
        "run", "--config", config.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap(),
    ]);
    assert!(matches!(res.status.code(), Some(0) | Some(2)), "{}", String::from_utf8_lossy(&res.stderr));
    let r = report(&out);
    assert_eq!(r["seed"], 9);
    assert_eq!(r["config"]["seed"], 9);
    assert_eq!(r["config"]["replicates"], 300);
    assert_eq!(r["config"]["r"], 2);
    assert_eq!(r["config"]["N"], 500);
    assert!(r["runtime_seconds"].is_null());
    assert!(r["config"].get("workers").is_none());
}

#[test]
fn psi_law_is_exact_and_seed_independent() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, seed) in dirs.iter().zip(["1", "2"]) {
        let res = transferlab(&[
            "run", "--experiment", "psi-law", "--n", "100000", "--seed", seed, "--timing", "off", "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(2), "sup distance at 1e5 exceeds 0.15");
    }
    let table = |d: &tempfile::TempDir| fs::read(d.path().join("psi_cdf.csv")).unwrap();
    assert_eq!(table(&dirs[0]), table(&dirs[1]));
    let r = report(dirs[0].path());
    assert_eq!(r["checks"][1]["name"], "psi_decade_monotone");
    assert_eq!(r["checks"][1]["pass"], true);
}
