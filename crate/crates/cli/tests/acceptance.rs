//! The acceptance criteria, one line each on stderr, then a single assert.

#[path = "../../counting/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cli::*;
use counting::{check_script, parse_script_str, KernelOptions};

fn suite() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

fn project(name: &str) -> PathBuf {
    suite().join(name)
}

fn oracle(name: &str, params: &[(&str, i64)]) -> OracleSummary {
    let opts = OracleOptions { params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(), pivots: None };
    run_oracle(&project(name), &opts).unwrap()
}

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($c:expr, $($fmt:tt)+) => {
        if !$c {
            return Err(format!($($fmt)+));
        }
    };
}

fn zk_end_to_end() -> Outcome {
    let t0 = Instant::now();
    let p = Project::load(&project("ZK Hats")).map_err(|e| e.to_string())?;
    let r = verify(&p, &VerifyOptions::default());
    let took = t0.elapsed();
    ensure!(r.verified(), "verdict {:?}, first open obligation {:?}", r.verdict, r.first_failed_obligation());
    let goal = p.script.goal.as_ref().ok_or("no goal")?;
    ensure!(goal.claim.to_string() == "(= (valid R) (- (pow2 R) 1))", "goal is {}", goal.claim);
    ensure!(took < Duration::from_secs(60), "took {:?}", took);
    Ok(format!("QHP-verified, goal {} in {:.2}s", goal.claim, took.as_secs_f64()))
}

fn zk_script_deletions() -> Outcome {
    let src = std::fs::read_to_string(project("ZK Hats").join(PROOF_FILE)).unwrap();
    let full = parse_script_str(&src).map_err(|e| e.to_string())?;
    let solver = common::solver();
    let kopts = KernelOptions::default();
    ensure!(check_script(&full, &solver, &kopts).accepted(), "the full script is rejected");
    let n = full.steps.len();
    for i in 0..=n {
        let mut s = full.clone();
        let gone = if i == n {
            s.goal = None;
            "goal".to_string()
        } else {
            s.steps.remove(i).label
        };
        let r = check_script(&s, &solver, &kopts);
        let at = r.rejected_at().ok_or(format!("accepted without {}", gone))?.to_string();
        let later: Vec<&str> = full.steps.iter().skip(i + 1).map(|s| s.label.as_str()).collect();
        ensure!(at == "goal" || later.contains(&at.as_str()), "without {} rejected at {}", gone, at);
    }
    Ok(format!("full script accepted; {} single deletions ({} steps and the goal) all rejected", n + 1, n))
}

fn zk_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut seen = vec![];
    for (r, want) in [(1, 1), (2, 3), (3, 7)] {
        let s = oracle("ZK Hats", &[("R", r)]);
        ensure!(s.exhaustive && s.holds, "R={}: {:?}", r, s);
        ensure!(
            s.min_classes == Some(want) && s.valid_count == Some(want),
            "R={}: classes {:?}, |Valid| {:?}",
            r,
            s.min_classes,
            s.valid_count
        );
        seen.push(want.to_string());
    }
    let took = t0.elapsed();
    ensure!(took < Duration::from_secs(5), "took {:?}", took);
    Ok(format!("classes = |Valid| = {} at R = 1, 2, 3 in {:.2}s", seen.join(", "), took.as_secs_f64()))
}

fn kernel_soundness() -> Outcome {
    let bad: Vec<String> = common::RULE_TABLE.iter().filter_map(common::check_rule).collect();
    ensure!(bad.is_empty(), "{}", bad.join("; "));
    let s = common::sweep(200);
    ensure!(s.violations.is_empty(), "{} violations, first:\n{}", s.violations.len(), s.violations[0]);
    ensure!(s.accepted > 0 && s.rejected > 0, "degenerate sweep: {} accepted, {} rejected", s.accepted, s.rejected);
    Ok(format!(
        "{} rules each admit and refuse as expected; 200 random scripts ({} accepted, {} rejected), no fact contradicted",
        common::RULE_TABLE.len(),
        s.accepted,
        s.rejected
    ))
}

fn benchmark_suite(b: &BenchSummary) -> Outcome {
    ensure!(b.rows.len() == 5 && b.verified() == 5, "{}", b.table());
    let slow: Vec<&BenchRow> = b.rows.iter().filter(|r| r.time_ms >= 60_000).collect();
    ensure!(slow.is_empty(), "over 60 s: {:?}", slow);
    for (d, want) in [(2, 2), (5, 5)] {
        let s = oracle("Electronic Purse", &[("decr", d)]);
        ensure!(s.holds && s.min_classes.is_some_and(|c| c >= want), "purse decr={}: {:?}", d, s);
    }
    for (n, want) in [(1, 1), (2, 3), (3, 7)] {
        let s = oracle("Password checker", &[("n", n)]);
        ensure!(s.holds && s.max_classes.is_some_and(|c| c <= want), "password n={}: {:?}", n, s);
    }
    for (n, want) in [(2, 2), (3, 6)] {
        let s = oracle("F-Y Array Shuffle", &[("n", n)]);
        ensure!(s.exhaustive && s.min_classes == Some(want) && s.max_classes == Some(want), "shuffle n={}: {:?}", n, s);
    }
    Ok("5/5 QHP-verified; oracle: purse >= 2, 5; password <= 1, 3, 7; shuffle exactly 2, 6".into())
}

fn oram_desk_scale(b: &BenchSummary) -> Outcome {
    let r = b.reports.iter().find(|r| r.project == "Path ORAM").ok_or("no ORAM report")?;
    let st = r.stage("enumeration").ok_or("no enumeration stage")?;
    ensure!(
        st.verdict == StageVerdict::Passed && st.obligations.iter().all(|o| o.verdict == ObligationVerdict::Proved),
        "{:?}",
        st
    );
    let mut counts = vec![];
    for (n, want, fact) in [(3, 2, 2), (4, 9, 6)] {
        let s = oracle("Path ORAM", &[("numBlks", n)]);
        ensure!(s.valid_count == Some(want) && want >= fact && s.bound == fact as i64, "numBlks={}: {:?}", n, s);
        counts.push(format!("{} >= {}", want, fact));
    }
    Ok(format!(
        "{} enumeration obligations proved; derangements {}. Note: the unbounded-size claim rests on the symbolic obligations only",
        st.obligations.len(),
        counts.join(", ")
    ))
}

fn determinism(first: &BenchSummary) -> Outcome {
    let second = run_benchmarks(&suite(), &VerifyOptions::default()).map_err(|e| e.to_string())?;
    let (a, b) = (to_json(first, false), to_json(&second, false));
    ensure!(a == b, "reports differ");
    Ok(format!("two suite runs give identical JSON ({} bytes without timing)", a.len()))
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    })
}

#[test]
fn acceptance() {
    let bench = run_benchmarks(&suite(), &VerifyOptions::default()).unwrap();
    let results = [
        ("1 ZK hats end-to-end", guarded(zk_end_to_end)),
        ("2 ZK script and single deletions", guarded(zk_script_deletions)),
        ("3 oracle agrees with |Valid| on ZK hats", guarded(zk_oracle)),
        ("4 counting kernel soundness", guarded(kernel_soundness)),
        ("5 benchmark suite", guarded(|| benchmark_suite(&bench))),
        ("6 Path ORAM at desk scale", guarded(|| oram_desk_scale(&bench))),
        ("7 determinism", guarded(|| determinism(&bench))),
    ];
    // Straight to the stream so the lines show even when output is captured.
    let mut err = std::io::stderr();
    for (name, r) in &results {
        let _ = match r {
            Ok(m) => writeln!(err, "PASS {}: {}", name, m),
            Err(m) => writeln!(err, "FAIL {}: {}", name, m),
        };
    }
    let failed: Vec<&str> = results.iter().filter(|(_, r)| r.is_err()).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed: {:?}", failed);
}
