mod common;

use common::*;
use counting::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

#[test]
fn admitted_facts_agree_with_brute_force() {
    let s = sweep(200);
    eprintln!("sweep: {} accepted, {} rejected", s.accepted, s.rejected);
    assert!(s.violations.is_empty(), "{}", s.violations.join("\n\n"));
    assert!(s.accepted >= 40 && s.rejected >= 20, "{} / {}", s.accepted, s.rejected);
}

#[test]
fn range_then_disjoint_gives_the_product() {
    let quad = (-4i64..=4, 0i64..=5, -4i64..=4, 0i64..=5);
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 50, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    runner
        .run(&quad, |(l1, w1, l2, w2)| {
            let f = format!("(and (<= {} x) (< x {}))", l1, l1 + w1);
            let g = format!("(and (<= {} y) (< y {}))", l2, l2 + w2);
            let src = decl("h", XY, &format!("(and {} {})", f, g))
                + &decl("f", X, &f)
                + &decl("g", Y, &g)
                + &format!(
                    "(step s (disjoint (h a) (f a) (g a))) (step r (range (f a)) (range (g a))) (goal (= (h a) {}))",
                    w1 * w2
                );
            let script = parse_script_str(&format!("(proof {})", src)).unwrap();
            let r = check_script(&script, &solver(), &KernelOptions::default());
            prop_assert!(r.accepted(), "{:?}\n{}", r.verdict, src);
            facts_hold(&script, &r).map_err(TestCaseError::fail)
        })
        .unwrap();
}
