use std::collections::BTreeMap;

use oracle::*;
use proptest::prelude::*;
use qhl::{parse_property_str, QhpProperty};
use term_core::{parse_term_str, Term};
use transition_system::{parse_system_str, TransitionSystem};

fn read(dir: &str, file: &str) -> String {
    std::fs::read_to_string(format!("{}/../../benchmarks/{}/{}", env!("CARGO_MANIFEST_DIR"), dir, file)).unwrap()
}

fn system(dir: &str) -> TransitionSystem {
    parse_system_str(&read(dir, "system.sexp")).unwrap()
}

fn property(dir: &str) -> QhpProperty {
    parse_property_str(&read(dir, "property.sexp")).unwrap()
}

fn instance(dir: &str, params: &[(&str, i64)]) -> FiniteInstance {
    parse_instance_str(&read(dir, "instance.sexp")).unwrap().instantiate(&system(dir), params).unwrap()
}

fn t(s: &str) -> Term {
    parse_term_str(s).unwrap()
}

fn purse_small() -> FiniteInstance {
    let spec =
        parse_instance_str("(instance (params (decr 2)) (domains (balance (int 0 5)) (steps (int 0 0))) (depth 4))").unwrap();
    spec.instantiate(&system("Electronic Purse"), &[]).unwrap()
}

#[test]
fn purse_has_one_trace_per_balance() {
    let inst = purse_small();
    let traces = Oracle::new(&inst).enumerate_traces().unwrap();
    assert_eq!(traces.len(), 6);
    assert!(traces.iter().all(|tr| tr.len() == 4));
}

#[test]
fn zk_two_rounds_has_sixteen_traces() {
    let mut inst = instance("ZK Hats", &[("R", 2)]);
    inst.depth = 3;
    assert_eq!(Oracle::new(&inst).enumerate_traces().unwrap().len(), 16);
}

#[test]
fn false_init_has_no_traces() {
    let mut inst = purse_small();
    inst.system.init = Term::ff();
    assert!(Oracle::new(&inst).enumerate_traces().unwrap().is_empty());
}

#[test]
fn composed_purse_projects_to_purse_traces() {
    let base = purse_small();
    let flat = base.system.self_compose(2).flatten();
    let mut domains = BTreeMap::new();
    for (n, d) in &base.domains {
        for i in 1..=2 {
            domains.insert(format!("{}.{}", n, i), d.clone());
        }
    }
    let params = BTreeMap::from([("decr.1".to_string(), 2), ("decr.2".to_string(), 2)]);
    let composed = FiniteInstance { system: flat, params, domains, ..base.clone() };
    let single: Vec<Vec<State>> = Oracle::new(&base).enumerate_traces().unwrap().into_iter().map(|t| t.states).collect();
    let pairs = Oracle::new(&composed).enumerate_traces().unwrap();
    assert_eq!(pairs.len(), 36);
    let n = base.system.vars.len();
    for p in pairs {
        for copy in 0..2 {
            let proj: Vec<State> = p.states.iter().map(|s| s[copy * n..(copy + 1) * n].to_vec()).collect();
            assert!(single.contains(&proj));
        }
    }
}

fn pred(body: &str) -> qhl::HyperLtl {
    qhl::parse_hyperltl(&term_core::parse_sexps(body).unwrap()[0]).unwrap()
}

#[test]
fn bounded_evaluation_examples() {
    let mut inst = purse_small();
    inst.depth = 2;
    let o = Oracle::new(&inst);
    let traces = o.enumerate_traces().unwrap();
    // balance 1 stabilises immediately; balance 5 is still moving at depth 2.
    let small = traces.iter().find(|tr| tr.states[0][0] == Value::Int(1)).unwrap();
    let big = traces.iter().find(|tr| tr.states[0][0] == Value::Int(5)).unwrap();
    assert!(small.closed && !big.closed);
    let g = pred("(globally (pred (a b) (= steps@1 steps@2)))");
    let env = BTreeMap::from([("a".to_string(), small), ("b".to_string(), small)]);
    assert_eq!(eval_bounded(&o, &g, &env).unwrap(), Some(true));
    let f = pred("(finally (pred (a b) (distinct steps@1 steps@2)))");
    let env = BTreeMap::from([("a".to_string(), small), ("b".to_string(), big)]);
    assert_eq!(eval_bounded(&o, &f, &env).unwrap(), Some(true));
    let g2 = pred("(globally (pred (a b) (>= balance@1 balance@2)))");
    let env = BTreeMap::from([("a".to_string(), big), ("b".to_string(), big)]);
    assert_eq!(eval_bounded(&o, &g2, &env).unwrap(), None);
}

#[test]
fn verdicts_are_stable_in_depth() {
    let g = pred("(globally (pred (a b) (<= steps@1 2)))");
    let mut prev: BTreeMap<i64, Tri> = BTreeMap::new();
    for d in 1..=7 {
        let mut inst = purse_small();
        inst.domains.insert("balance".into(), (0..10).map(Value::Int).collect());
        inst.depth = d;
        let o = Oracle::new(&inst);
        for tr in o.enumerate_traces().unwrap() {
            let b = tr.states[0][0].as_int().unwrap();
            let env = BTreeMap::from([("a".to_string(), &tr), ("b".to_string(), &tr)]);
            let v = eval_bounded(&o, &g, &env).unwrap();
            if let Some(Some(old)) = prev.get(&b) {
                assert_eq!(v, Some(*old), "balance {} depth {}", b, d);
            }
            prev.insert(b, v);
        }
    }
    assert_eq!(prev[&9], Some(false));
    assert_eq!(prev[&3], Some(true));
}

fn cheating_pivot(o: &Oracle) -> BoundedTrace {
    let traces = o.enumerate_traces().unwrap();
    let c = o.var_index("C").unwrap();
    let p = o.var_index("P").unwrap();
    traces.into_iter().find(|tr| tr.states[0][c] == tr.states[0][p]).unwrap()
}

#[test]
fn zk_class_counts_match_two_to_the_r_minus_one() {
    let prop = property("ZK Hats");
    for (r, want) in [(1, 1), (2, 3), (3, 7)] {
        let inst = instance("ZK Hats", &[("R", r)]);
        let o = Oracle::new(&inst);
        assert_eq!(count_equivalence_classes(&o, &prop, &cheating_pivot(&o)).unwrap(), Some(want), "R = {}", r);
    }
}

#[test]
fn brute_count_examples() {
    let dom: Vec<Value> = (-3..=5).map(Value::Int).collect();
    let n = brute_count(&t("(and (<= 0 i) (< i 2))"), &[("i".into(), dom)], &BTreeMap::new(), (0, 0), 1000).unwrap();
    assert_eq!(n, 2);
    let inst = instance("ZK Hats", &[("R", 3)]);
    let valid = t("(and (exists ((j Int)) (and (<= 1 j) (<= j R) (distinct (select e j) 0)))
                        (forall ((j Int)) (=> (or (< j 1) (> j R)) (= (select e j) 0))))");
    let fixed = BTreeMap::from([("R".to_string(), Value::Int(3))]);
    let n = brute_count(&valid, &[("e".into(), inst.domains["e"].clone())], &fixed, inst.quant_range, 1000).unwrap();
    assert_eq!(n, 7);
}

#[test]
fn caps_fail_loudly() {
    let mut inst = instance("ZK Hats", &[("R", 3)]);
    inst.cap = 10;
    assert!(matches!(Oracle::new(&inst).enumerate_traces(), Err(OracleError::CapExceeded(10))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn brute_count_agrees_with_range(a in -8i64..8, b in -8i64..8) {
        let dom: Vec<Value> = (-10..=10).map(Value::Int).collect();
        let fixed = BTreeMap::from([("a".to_string(), Value::Int(a)), ("b".to_string(), Value::Int(b))]);
        let n = brute_count(&t("(and (<= a i) (< i b))"), &[("i".into(), dom)], &fixed, (0, 0), 1000).unwrap();
        prop_assert_eq!(n as i64, (b - a).max(0));
    }
}

#[test]
fn zk_failing_pivot_relates_every_response() {
    // With a failing pivot the body is vacuous, so all 2^R response traces are related.
    let prop = property("ZK Hats");
    let inst = instance("ZK Hats", &[("R", 2)]);
    let o = Oracle::new(&inst);
    let c = o.var_index("C").unwrap();
    let p = o.var_index("P").unwrap();
    let pivot = o.enumerate_traces().unwrap().into_iter().find(|tr| tr.states[0][c] != tr.states[0][p]).unwrap();
    assert_eq!(count_equivalence_classes(&o, &prop, &pivot).unwrap(), Some(4));
}
