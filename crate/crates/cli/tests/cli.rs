use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bench_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(name)
}

fn copy_project(name: &str, into: &Path) -> PathBuf {
    let to = into.join(name);
    std::fs::create_dir_all(&to).unwrap();
    for e in std::fs::read_dir(bench_dir(name)).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
    to
}

fn edit(file: &Path, from: &str, to: &str) {
    let s = std::fs::read_to_string(file).unwrap();
    assert!(s.contains(from), "{} does not contain {}", file.display(), from);
    std::fs::write(file, s.replacen(from, to, 1)).unwrap();
}

fn qhenum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhenum")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{}: {}", e, String::from_utf8_lossy(&out.stdout)))
}

fn stage<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["stages"].as_array().unwrap().iter().find(|s| s["stage"] == name).unwrap()
}

#[test]
fn purse_verifies_with_a_complete_report() {
    let out = qhenum(&["verify", path(&bench_dir("Electronic Purse")), "--json", "-"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["schema"], "report/v1");
    assert_eq!(r["verdict"], "QHP-verified");
    assert!(r.get("failed_stage").is_none());
    let names: Vec<&str> = r["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(names, ["well-definedness", "enumeration", "counting", "final"]);
    for s in r["stages"].as_array().unwrap() {
        assert_eq!(s["verdict"], "passed");
        assert!(s["obligations"].as_array().unwrap().iter().all(|o| o["verdict"] == "proved"));
    }
}

#[test]
fn report_matches_the_golden_file() {
    let out = qhenum(&["verify", path(&bench_dir("Electronic Purse")), "--json", "-", "--no-timing"]);
    let mut r = json(&out);
    // The solver banner depends on the installed build.
    r["solver"] = Value::String("<solver>".into());
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/purse.json");
    let want: Value = serde_json::from_str(&std::fs::read_to_string(golden).unwrap()).unwrap();
    assert_eq!(r, want);
}

#[test]
fn trivial_diff_is_not_well_defined() {
    let tmp = tempfile::tempdir().unwrap();
    let p = copy_project("Electronic Purse", tmp.path());
    edit(&p.join("property.sexp"), ":diff (finally (pred (ta tb) (distinct balance@1 balance@2)))", ":diff true");
    let out = qhenum(&["verify", path(&p), "--json", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["verdict"], "stage-failed");
    assert_eq!(r["failed_stage"], "well-definedness");
    for later in ["enumeration", "counting", "final"] {
        assert_eq!(stage(&r, later)["verdict"], "skipped");
    }
}

#[test]
fn a_moving_parameter_is_caught() {
    let tmp = tempfile::tempdir().unwrap();
    let p = copy_project("Electronic Purse", tmp.path());
    edit(&p.join("system.sexp"), "(= decr! decr)", "true");
    let out = qhenum(&["verify", path(&p), "--json", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    let wd = stage(&r, "well-definedness");
    assert_eq!(wd["verdict"], "failed");
    assert!(wd["obligations"].as_array().unwrap().iter().any(|o| o["name"] == "params-frozen" && o["verdict"] == "failed"));
}

#[test]
fn script_count_must_match_valid() {
    // The script still proves its own goal, over a count that is not Valid.
    let tmp = tempfile::tempdir().unwrap();
    let p = copy_project("Electronic Purse", tmp.path());
    edit(&p.join("proof.sexp"), "(< y decr)", "(< y (+ decr 1))");
    let out = qhenum(&["verify", path(&p), "--json", "-"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(stage(&r, "counting")["verdict"], "passed");
    assert_eq!(r["failed_stage"], "final");
    let fin = stage(&r, "final");
    assert!(fin["obligations"].as_array().unwrap().iter().any(|o| o["name"] == "valid-link" && o["verdict"] == "failed"));
}

#[test]
fn config_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(qhenum(&["verify", path(&tmp.path().join("missing"))]).status.code(), Some(3));
    assert_eq!(qhenum(&["verify", "--timeout", "soon", path(&bench_dir("ZK Hats"))]).status.code(), Some(3));
    assert_eq!(qhenum(&["frobnicate"]).status.code(), Some(3));
    let p = copy_project("ZK Hats", tmp.path());
    std::fs::write(p.join("system.sexp"), "(system").unwrap();
    let out = qhenum(&["verify", path(&p)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("system.sexp"));
    assert_eq!(qhenum(&["oracle", path(&bench_dir("ZK Hats")), "--set", "R"]).status.code(), Some(3));
}

#[test]
fn empty_suite_warns_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qhenum(&["bench", path(tmp.path()), "--json", "-"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let s = json(&out);
    assert_eq!(s["rows"].as_array().unwrap().len(), 0);
    assert_eq!(s["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn broken_oram_enumeration_is_localised() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["Electronic Purse", "F-Y Array Shuffle", "Password checker", "Path ORAM", "ZK Hats"] {
        copy_project(name, tmp.path());
    }
    // The related request must follow the inverse, not the derangement.
    edit(&tmp.path().join("Path ORAM/enumeration.sexp"), "(= req@2 (select W req@1))", "(= req@2 (select Y req@1))");
    let out = qhenum(&["bench", path(tmp.path()), "--timeout", "5000", "--json", "-"]);
    assert_ne!(out.status.code(), Some(0));
    let s = json(&out);
    let rows = s["rows"].as_array().unwrap();
    assert_eq!(rows.iter().filter(|r| r["verdict"] == "QHP-verified").count(), 4);
    let oram = rows.iter().find(|r| r["project"] == "Path ORAM").unwrap();
    assert_ne!(oram["verdict"], "QHP-verified");
    let at = oram["failed_at"].as_str().unwrap();
    assert!(at.starts_with("enumeration/injective/"), "{}", at);
}

#[test]
fn oracle_reports_classes_and_valid() {
    let out = qhenum(&["oracle", path(&bench_dir("ZK Hats")), "--set", "R=2", "--json", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let s = json(&out);
    assert_eq!(s["schema"], "oracle/v1");
    assert_eq!(s["exhaustive"], true);
    assert_eq!(s["min_classes"], 3);
    assert_eq!(s["valid_count"], 3);
    assert_eq!(s["holds"], true);
}
