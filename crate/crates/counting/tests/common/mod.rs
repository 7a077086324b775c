//! Shared by the rule tests here and the end-to-end acceptance run: one
//! accepted and one rejected script per rule, and a random sweep whose
//! admitted facts are checked by brute-force counting.
#![allow(dead_code)]

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;

use counting::*;
use oracle::{brute_count, Evaluator, Value};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use smt_backend::Solver;
use term_core::{Term, Var};

const BOX: i64 = 4;
const DOMAIN: (i64, i64) = (-12, 12);
const PARAMS: std::ops::RangeInclusive<i64> = -3..=3;

pub fn solver() -> Solver {
    Solver::resolve(None).with_timeout(20_000)
}

/// `lo <= v < hi` with both ends possibly shifted by the parameter.
fn interval(v: &'static str) -> impl Strategy<Value = String> {
    (-3i64..=3, 0i64..=2, -3i64..=4, 0i64..=2).prop_map(move |(l, lk, h, hk)| {
        let end = |c: i64, k: i64| if k == 0 { c.to_string() } else { format!("(+ {} (* {} a))", c, k - 1) };
        format!("(and (<= {} {v}) (< {v} {}))", end(l, lk), end(h, hk))
    })
}

fn atom(vars: &'static [&'static str]) -> impl Strategy<Value = String> {
    let n = vars.len();
    (prop::collection::vec(-2i64..=2, n), -1i64..=1, -3i64..=3, any::<bool>()).prop_map(move |(cs, ka, c, strict)| {
        let mut sum: Vec<String> = vars.iter().zip(&cs).map(|(v, k)| format!("(* {} {})", k, v)).collect();
        sum.push(format!("(* {} a)", ka));
        format!("({} (+ {}) {})", if strict { "<" } else { "<=" }, sum.join(" "), c)
    })
}

/// A small boolean combination, always kept inside the box.
fn formula(vars: &'static [&'static str]) -> impl Strategy<Value = String> {
    let leaf = prop_oneof![atom(vars), interval(vars[0]), Just("true".to_string()), Just("false".to_string())];
    let body = leaf.prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(|v| format!("(and {})", v.join(" "))),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(|v| format!("(or {})", v.join(" "))),
            inner.prop_map(|f| format!("(not {})", f)),
        ]
    });
    body.prop_map(move |b| {
        let boxes: Vec<String> = vars.iter().map(|v| format!("(<= (- {b}) {v}) (<= {v} {b})", b = BOX, v = v)).collect();
        format!("(and {} {})", boxes.join(" "), b)
    })
}

pub fn decl(name: &str, vars: &[&str], f: &str) -> String {
    let vs: Vec<String> = vars.iter().map(|v| format!("({} Int)", v)).collect();
    format!("(declare-count {} (a) :vars ({}) :formula {})\n", name, vs.join(" "), f)
}

pub const X: &[&str] = &["x"];
pub const Y: &[&str] = &["y"];
pub const XY: &[&str] = &["x", "y"];

fn scripts() -> impl Strategy<Value = String> {
    let range = interval("x").prop_map(|f| decl("f", X, &f) + "(step s (range (f a)))");
    let consts = (formula(X), -3i64..=3, 1i64..=6, any::<bool>()).prop_map(|(f, k, n, lb)| {
        decl("f", X, &f) + &format!("(step s ({} (f {}) {}))", if lb { "const-lb" } else { "const-ub" }, k, n)
    });
    let positive = formula(X).prop_map(|f| decl("f", X, &f) + "(step s (positive (f a)))");
    let ub = (formula(X), formula(X)).prop_map(|(f, g)| decl("f", X, &f) + &decl("g", X, &g) + "(step s (ub (f a) (g a)))");
    let or = (formula(X), formula(X), formula(X), any::<bool>()).prop_map(|(g, h, other, exact)| {
        let gh = if exact { format!("(and {} {})", g, h) } else { other };
        decl("f", X, &format!("(or {} {})", g, h))
            + &decl("g", X, &g)
            + &decl("h", X, &h)
            + &decl("gh", X, &gh)
            + "(step s (or (f a) (g a) (h a) (gh a)))"
    });
    let product = (formula(X), formula(Y), formula(XY), any::<bool>(), any::<bool>()).prop_map(|(f, g, h, exact, dis)| {
        let h = if exact { format!("(and {} {})", f, g) } else { h };
        decl("h", XY, &h)
            + &decl("f", X, &f)
            + &decl("g", Y, &g)
            + &format!("(step s ({} (h a) (f a) (g a)))", if dis { "disjoint" } else { "and-ub" })
    });
    let inj = (formula(X), formula(Y), -2i64..=2, -2i64..=2).prop_map(|(f, g, k, c)| {
        decl("f", X, &f) + &decl("g", Y, &g) + &format!("(step s (injectivity (f a) (g a) :witness ((y (+ (* {} x) {})))))", k, c)
    });
    prop_oneof![range, consts, positive, ub, or, product, inj]
}

fn int(v: Value) -> i64 {
    v.as_int().expect("integer")
}

/// Replace each count application with its brute-force value.
fn ground(t: &Term, script: &ProofScript, env: &BTreeMap<Var, Value>) -> Term {
    if let Term::App(f, args) = t {
        let name = f.strip_prefix(COUNT_PREFIX).unwrap_or(f);
        if let Some(d) = script.decls.iter().find(|d| d.name == name) {
            let look = |v: &Var| env.get(v).cloned();
            let mut ev = Evaluator::new(&look, DOMAIN);
            let fixed: BTreeMap<String, Value> =
                d.params.iter().zip(args).map(|(p, a)| (p.clone(), Value::Int(int(ev.eval(a).unwrap())))).collect();
            let dom: Vec<Value> = (DOMAIN.0..=DOMAIN.1).map(Value::Int).collect();
            let counted: Vec<(String, Vec<Value>)> = d.vars.iter().map(|(n, _)| (n.clone(), dom.clone())).collect();
            let n = brute_count(&d.formula, &counted, &fixed, DOMAIN, 1 << 20).unwrap();
            return Term::int(n);
        }
    }
    t.map_children(&mut |c| ground(c, script, env))
}

/// Every admitted fact holds at every parameter value where its guard does.
pub fn facts_hold(script: &ProofScript, r: &ScriptReport) -> Result<(), String> {
    for st in &r.steps {
        for f in &st.facts {
            let metas: Vec<Var> = f.metas().into_iter().collect();
            assert!(metas.len() <= 2, "{:?}", metas);
            let points: Vec<Vec<i64>> = match metas.len() {
                0 => vec![vec![]],
                1 => PARAMS.map(|a| vec![a]).collect(),
                _ => PARAMS.flat_map(|a| PARAMS.map(move |b| vec![a, b])).collect(),
            };
            for pt in points {
                let env: BTreeMap<Var, Value> = metas.iter().cloned().zip(pt.iter().map(|n| Value::Int(*n))).collect();
                let look = |v: &Var| env.get(v).cloned();
                let mut ev = Evaluator::new(&look, DOMAIN);
                if !ev.eval_bool(&ground(&f.guard, script, &env)).unwrap() {
                    continue;
                }
                let rel = ground(&f.relation, script, &env);
                if !ev.eval_bool(&rel).unwrap() {
                    return Err(format!("{} admitted {} but at {:?} it reads {}", f.rule, f.relation, pt, rel));
                }
            }
        }
    }
    Ok(())
}

pub struct Sweep {
    pub accepted: usize,
    pub rejected: usize,
    /// Admitted facts that brute force contradicts.
    pub violations: Vec<String>,
}

/// Run `cases` random scripts through the kernel without stopping at the
/// first violation.
pub fn sweep(cases: u32) -> Sweep {
    let mut runner = TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let (yes, no) = (Cell::new(0), Cell::new(0));
    let bad = RefCell::new(vec![]);
    let _ = runner.run(&scripts(), |src| {
        let script = parse_script_str(&format!("(proof {} (goal true))", src)).unwrap();
        let r = check_script(&script, &solver(), &KernelOptions::default());
        match &r.verdict {
            ScriptVerdict::Accepted => yes.set(yes.get() + 1),
            ScriptVerdict::Rejected { .. } => no.set(no.get() + 1),
        }
        if let Err(e) = facts_hold(&script, &r) {
            bad.borrow_mut().push(format!("{}\n{}", e, src));
        }
        Ok(())
    });
    Sweep { accepted: yes.get(), rejected: no.get(), violations: bad.into_inner() }
}

const F13: &str = "(declare-count f (a) :vars ((x Int)) :formula (and (<= 1 x) (<= x 3)))";
const FG: &str = "(declare-count f (a) :vars ((x Int)) :formula (and (<= 0 x) (< x 2)))
  (declare-count g (a) :vars ((x Int)) :formula (and (<= 0 x) (< x 4)))";
const CLOSED: &str = "(declare-count f (a) :vars ((x Int)) :formula (and (<= 0 x) (< x 2)))
  (declare-count q (a) :vars ((x Int)) :formula (and (<= 0 x) (<= x 2)))";
const OR: &str = "(declare-count f (a) :vars ((x Int)) :formula (and (<= 0 x) (< x 4)))
  (declare-count g (a) :vars ((x Int)) :formula (and (<= 0 x) (< x 2)))
  (declare-count h (a) :vars ((x Int)) :formula (and (<= 1 x) (< x 4)))
  (declare-count gh (a) :vars ((x Int)) :formula (and (<= 1 x) (< x 2)))";
const PROD: &str = "(declare-count f (a) :vars ((x Int)) :formula (and (<= 0 x) (< x 2)))
  (declare-count g (a) :vars ((y Int)) :formula (and (<= 0 y) (< y 3)))";
const BITS: &str = "(declare-count num (R) :vars ((x Int)) :formula (and (<= 0 x) (< x (pow2 R))))
  (declare-count w (R) :vars ((i Int)) :formula (and (<= 0 i) (< i 2)))";
const TRI: &str = "(declare-rec tri :base (0 0) :step (+ prev (+ n 1)))
  (declare-count c (n) :vars ((i Int)) :formula (and (<= 0 i) (< i (tri n))))
  (step r (range (c n)))";

/// Per rule: declarations, a step `s` that must be admitted, one that must
/// be refused, and a goal. Both scripts are `(proof decls step goal)`.
pub const RULE_TABLE: &[(&str, &str, &str, &str, &str)] = &[
    ("range", CLOSED, "(step s (range (f a)))", "(step s (range (q a)))", "(goal (= (f a) 2))"),
    ("const-lb", F13, "(step s (const-lb (f 0) 3))", "(step s (const-lb (f 0) 4))", "(goal (>= (f 0) 3))"),
    ("const-ub", F13, "(step s (const-ub (f 0) 4))", "(step s (const-ub (f 0) 3))", "(goal (<= (f 0) 3))"),
    ("positive", FG, "(step s (positive (f a)))", "(step s (positive (h a)))", "(goal (>= (f a) 0))"),
    ("ub", FG, "(step s (ub (f a) (g a)))", "(step s (ub (g a) (f a)))", "(goal (<= (f a) (g a)))"),
    (
        "or",
        OR,
        "(step s (or (f a) (g a) (h a) (gh a)))",
        "(step s (or (f a) (g a) (h a) (h a)))",
        "(goal (= (f a) (- (+ (g a) (h a)) (gh a))))",
    ),
    (
        "and-ub",
        PROD,
        "(declare-count k (a) :vars ((x Int) (y Int)) :formula (and (<= 0 x) (< x 2) (<= 0 y) (< y 3)))
         (step s (and-ub (k a) (f a) (g a)))",
        "(declare-count k (a) :vars ((x Int) (y Int)) :formula (and (<= 0 x) (< x 2) (<= 0 y) (< y 4)))
         (step s (and-ub (k a) (f a) (g a)))",
        "(goal (<= (k a) (* (f a) (g a))))",
    ),
    (
        "disjoint",
        PROD,
        "(declare-count k (a) :vars ((x Int) (y Int)) :formula (and (<= 0 x) (< x 2) (<= 0 y) (< y 3)))
         (step s (disjoint (k a) (f a) (g a)))",
        "(declare-count k (a) :vars ((x Int) (y Int)) :formula (and (<= 0 x) (< x 2) (<= 0 y) (< y 3) (< x y)))
         (step s (disjoint (k a) (f a) (g a)))",
        "(goal (= (k a) (* (f a) (g a))))",
    ),
    (
        "injectivity",
        FG,
        "(step s (injectivity (f a) (g a) :witness ((x (* 2 x)))))",
        "(step s (injectivity (f a) (g a) :witness ((x 0))))",
        "(goal (<= (f a) (g a)))",
    ),
    (
        "ind-geq",
        BITS,
        "(step s (ind-geq (num R) (w R) :n R :witness ((x (+ (* 2 x) i))) :guard (>= R 0)))",
        "(step s (ind-geq (num R) (w R) :n R :witness ((x (* 2 x))) :guard (>= R 0)))",
        "(goal (>= (num (+ R 1)) (* (num R) (w R))) :guard (>= R 0))",
    ),
    (
        "ind-leq",
        BITS,
        "(step s (ind-leq (num R) (w R) :n R :hx ((x (div x 2))) :hy ((i (mod x 2))) :guard (>= R 0)))",
        "(step s (ind-leq (num R) (w R) :n R :hx ((x (div x 2))) :hy ((i 0)) :guard (>= R 0)))",
        "(goal (<= (num (+ R 1)) (* (num R) (w R))) :guard (>= R 0))",
    ),
    (
        "close-recurrence",
        TRI,
        "(step s (close-recurrence (c n) = (tri n) :n n :base 0))",
        "(step s (close-recurrence (c n) = (* 2 n) :n n :base 0))",
        "(goal (= (c 3) 6))",
    ),
];

pub enum Outcome {
    Accepted,
    RejectedAt(String, CountError),
}

pub fn run_entry(decls: &str, step: &str, goal: &str) -> Outcome {
    let script = parse_script_str(&format!("(proof {} {} {})", decls, step, goal)).unwrap();
    match check_script(&script, &solver(), &KernelOptions::default()).verdict {
        ScriptVerdict::Accepted => Outcome::Accepted,
        ScriptVerdict::Rejected { at, reason } => Outcome::RejectedAt(at, reason),
    }
}

/// `None` when the rule behaves, else what went wrong.
pub fn check_rule(entry: &(&str, &str, &str, &str, &str)) -> Option<String> {
    let (name, decls, pos, neg, goal) = *entry;
    if let Outcome::RejectedAt(at, e) = run_entry(decls, pos, goal) {
        return Some(format!("{}: positive case rejected at {}: {}", name, at, e));
    }
    match run_entry(decls, neg, goal) {
        Outcome::RejectedAt(at, _) if at == "s" => None,
        Outcome::RejectedAt(at, e) => Some(format!("{}: negative case rejected at {} rather than the step: {}", name, at, e)),
        Outcome::Accepted => Some(format!("{}: negative case accepted", name)),
    }
}
