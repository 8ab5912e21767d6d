use std::process::{Command, Output};

use serde_json::Value;

fn ordmms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordmms")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = ordmms(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn bbfs_solve_on_worked_example() {
    let v = json(&["solve", "--in", "three-agents", "--method", "bbfs"]);
    assert_eq!(v["allocation"]["bundles"], serde_json::json!([[0], [1, 4, 5], [2, 3]]));
    let values: Vec<u64> = v["agents"].as_array().unwrap().iter().map(|a| a["value"].as_u64().unwrap()).collect();
    let guarantees: Vec<u64> = v["agents"].as_array().unwrap().iter().map(|a| a["guarantee"].as_u64().unwrap()).collect();
    assert_eq!(values, [10, 13, 11]);
    assert_eq!(guarantees, [9, 11, 10]);
}

#[test]
fn bbfs_shares_as_csv() {
    assert_eq!(stdout(&["bbfs", "--in", "three-agents", "--format", "csv"]), "agent,share\n0,9\n1,11\n2,10\n");
}

#[test]
fn mms_csv_row() {
    let text = stdout(&["mms", "--in", "three-agents", "--ell", "1", "--d", "3", "--format", "csv"]);
    assert_eq!(text, "agent,ell,d,method,value,lower,upper\n0,1,3,exact,10,,\n");
}

#[test]
fn ordinal_solve_meets_guarantees() {
    for ell in ["1", "2"] {
        let v = json(&["solve", "--in", "three-agents", "--ell", ell]);
        for a in v["agents"].as_array().unwrap() {
            assert!(a["value"].as_u64() >= a["guarantee"].as_u64(), "{a}");
        }
    }
}

#[test]
fn instance_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let out = dir.path().join("fixture.json");
    stdout(&["fixtures", "three-agents", "--out", out.to_str().unwrap()]);
    std::fs::copy(&out, &path).unwrap();
    let from_file = stdout(&["bbfs", "--in", path.to_str().unwrap()]);
    assert_eq!(from_file, stdout(&["bbfs", "--in", "three-agents"]));
}

#[test]
fn simulate_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let svg = dir.path().join("r.svg");
    stdout(&[
        "simulate", "--experiment", "ordinal", "--ns", "3", "--m-per-agent", "2,4", "--trials", "20",
        "--out", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,m,param,metric,value\n"), "{text}");
    assert!(text.contains("3,6,ell=2,mean,"));
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn verify_responsive_reports_success() {
    let out = ordmms(&["verify-responsive"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("verified: d = 2, 15 goods, 32768 bipartitions"));
}

#[test]
fn fixtures_are_listed() {
    let text = stdout(&["fixtures"]);
    for name in ordinal_mms::fixtures::FIXTURE_NAMES {
        assert!(text.contains(name));
    }
}

#[test]
fn bad_input_fails_cleanly() {
    let out = ordmms(&["solve", "--in", "no-such-instance"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = ordmms(&["solve", "--in", "three-agents", "--ell", "2", "--method", "bbfs"]);
    assert!(!out.status.success());
}
