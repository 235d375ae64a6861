use std::process::{Command, Output};

use serde_json::Value;

fn cubic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubic")).args(args).env_remove("CUBIC_THREADS").output().unwrap()
}

fn report(args: &[&str]) -> Value {
    let out = cubic(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["format_version"], "cubic-cli/1");
    assert_eq!(v["command"], args[0]);
    assert!(v["config"].is_object());
    v
}

#[test]
fn enumerate_writes_points_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.jsonl");
    let v = report(&["enumerate", "--surface", "1,2,3,4", "--height", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(v["config"]["surface"], "1,2,3,4");
    assert_eq!(v["result"]["first"][0]["p"], "(1:0:1:-1)");
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count() as u64, v["result"]["count"].as_u64().unwrap());
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["h"], 3);
    assert_eq!(first["on_line"], false);
    // a points file feeds the other commands
    let d = report(&["descend", "--surface", "1,2,3,4", "--points", path.to_str().unwrap()]);
    assert!(d["result"]["d_table"].is_array());
}

#[test]
fn generate_report_has_the_documented_fields() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let v = report(&["generate", "--surface", "1,2,3,4", "--height", "200", "--gen", "(1:-1:-1:1)", "--csv", csv.to_str().unwrap()]);
    for k in ["surface", "gen", "Nr", "H_bad", "L", "d_table", "count_table"] {
        assert!(v["result"].get(k).is_some(), "missing {k}");
    }
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().next().unwrap(), "H,N(H),ratio,d");
}

#[test]
fn exit_codes() {
    assert_eq!(cubic(&["generate", "--surface", "1,2,3,4", "--height", "50", "--gen", "(1:1:1:1)"]).status.code(), Some(4));
    assert_eq!(cubic(&["generate", "--surface", "1,2,3,4", "--height", "3", "--gen", "(1:-1:-1:1)"]).status.code(), Some(2));
    assert_eq!(cubic(&["enumerate", "--surface", "1,2,0,4", "--height", "10"]).status.code(), Some(2));
    assert_eq!(cubic(&["enumerate", "--surface", "1,2,3,4", "--height", "100", "--memory-mb", "0"]).status.code(), Some(3));
    assert_eq!(cubic(&["verify-axioms", "--surface", "1,2,3,4", "--field", "3"]).status.code(), Some(5));
    assert_eq!(cubic(&["verify-axioms", "--surface", "1,2,3,4", "--field", "6"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_cubic"))
        .args(["check-plane", "--plane", "fano"])
        .env("CUBIC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn property_failures_exit_zero_with_fail_verdict() {
    assert_eq!(report(&["count-fit", "--surface", "1,2,3,4", "--height", "50", "--picard-rank", "1"])["verdict"], "FAIL");
    let v = report(&["check-plane", "--plane", "nearfield9"]);
    assert_eq!(v["verdict"], "FAIL");
    assert_eq!(v["result"]["report"]["incidence"]["pass"], true);
    assert_eq!(report(&["reconstruct-field", "--surface", "1,2,3,4", "--field", "7"])["verdict"], "FAIL");
}

#[test]
fn field_and_surface_reconstruction() {
    let v = report(&["reconstruct-field", "--surface", "1,2,3,4", "--field", "11"]);
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["result"]["order"], 11);
    let v = report(&["reconstruct-surface", "--surface", "1,1,7,7", "--seed", "3"]);
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["result"]["proportional_to_source"], true);
}

#[test]
fn structure_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let p = path.to_str().unwrap();
    let a = report(&["verify-axioms", "--surface", "1,2,3,4", "--field", "5", "--dump-structure", p]);
    assert_eq!(a["verdict"], "PASS");
    let b = report(&["verify-axioms", "--structure", p]);
    assert_eq!(a["result"], b["result"]);
    let d = report(&["detect-config", "--structure", p]);
    assert_eq!(d["verdict"], "FAIL");
}

#[test]
fn detect_config_over_f11() {
    let v = report(&["detect-config", "--surface", "1,2,3,4", "--field", "11"]);
    assert_eq!(v["verdict"], "PASS");
    assert_eq!(v["result"]["configurations"], 48);
}

#[test]
fn planes_and_toys() {
    assert_eq!(report(&["check-plane", "--plane", "pg:3"])["verdict"], "PASS");
    assert_eq!(report(&["check-plane", "--toy", "6"])["verdict"], "PASS");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inc.json");
    std::fs::write(&path, r#"{"points": 3, "lines": [[0, 1], [1, 2]]}"#).unwrap();
    assert_eq!(report(&["check-plane", "--incidence", path.to_str().unwrap()])["verdict"], "FAIL");
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["descend", "--surface", "1,2,3,5", "--height", "300"];
    let one = Command::new(env!("CARGO_BIN_EXE_cubic")).args(args).env("CUBIC_THREADS", "1").output().unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_cubic")).args(args).args(["--threads", "3"]).env_remove("CUBIC_THREADS").output().unwrap();
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}
