use std::collections::BTreeMap;
use std::os::unix::fs::PermissionsExt;

use smt_backend::*;
use term_core::{parse_term_str, Sort, Var};

fn solver() -> Solver {
    Solver::resolve(None).with_timeout(20_000)
}

fn script(dir: &std::path::Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, format!("#!/bin/sh\n{}\n", body)).unwrap();
    std::fs::set_permissions(&p, std::fs::Permissions::from_mode(0o755)).unwrap();
    p
}

#[test]
fn false_is_unsat() {
    let mut q = Query::new("false");
    q.assert(parse_term_str("false").unwrap());
    assert_eq!(solver().solve(&q).unwrap().status, Status::Unsat);
}

#[test]
fn equality_gives_model() {
    let mut q = Query::new("eq").with_model();
    q.assert(parse_term_str("(= x 3)").unwrap());
    q.declare_from(&BTreeMap::from([(Var::plain("x"), Sort::Int)]));
    let v = solver().solve(&q).unwrap();
    assert_eq!(v.status, Status::Sat);
    assert_eq!(v.model.unwrap().int("x"), Some(3.into()));
}

#[test]
fn slow_solver_is_killed_and_reported_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let slow = script(dir.path(), "slow", "sleep 30");
    let s = Solver::new(slow).with_timeout(200);
    let t = std::time::Instant::now();
    let v = s.solve(&Query::new("slow")).unwrap();
    assert_eq!(v.status, Status::Unknown);
    assert_eq!(v.reason.as_deref(), Some("timeout"));
    assert!(t.elapsed().as_secs() < 10);
}

#[test]
fn garbage_reply_is_protocol_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = script(dir.path(), "bad", "cat > /dev/null; echo '(error \"nope\")'");
    assert!(matches!(Solver::new(bad).solve(&Query::new("bad")), Err(SolverError::Protocol { .. })));
    assert!(matches!(Solver::new(dir.path().join("missing")).solve(&Query::new("m")), Err(SolverError::Spawn { .. })));
}

#[test]
fn transcripts_are_named_by_label() {
    let dir = tempfile::tempdir().unwrap();
    let s = solver().with_debug_dir(Some(dir.path().to_path_buf()));
    let mut q = Query::new("distinctness/base");
    q.assert(parse_term_str("true").unwrap());
    assert_eq!(s.solve(&q).unwrap().status, Status::Sat);
    let text = std::fs::read_to_string(dir.path().join("distinctness_base.smt2")).unwrap();
    assert!(text.starts_with("(set-logic AUFLIA)"));
    assert!(text.contains("; sat"));
}
