use enumeration::*;
use qhl::{parse_property_str, QhpProperty};
use smt_backend::Solver;
use transition_system::{parse_system_str, TransitionSystem};

fn read(dir: &str, file: &str) -> String {
    std::fs::read_to_string(format!("{}/../../benchmarks/{}/{}", env!("CARGO_MANIFEST_DIR"), dir, file)).unwrap()
}

fn load(dir: &str) -> (TransitionSystem, QhpProperty, EnumerationWitness) {
    (
        parse_system_str(&read(dir, "system.sexp")).unwrap(),
        parse_property_str(&read(dir, "property.sexp")).unwrap(),
        parse_witness_str(&read(dir, "enumeration.sexp")).unwrap(),
    )
}

fn solver() -> Solver {
    solver_ms(60_000)
}

// Broken witnesses over quantified theories often come back unknown rather
// than sat; either way the bundle is rejected, so mutants get a short budget.
fn solver_ms(ms: u64) -> Solver {
    Solver::resolve(None).with_timeout(ms).with_debug_dir(std::env::var_os("BUNDLE_DUMP").map(Into::into))
}

fn show(r: &DischargeReport) -> String {
    r.results.iter().map(|o| format!("{} {} {}ms\n", o.label, o.verdict.name(), o.time_ms)).collect()
}

#[test]
fn zk_injective_bundle_is_established() {
    let (sys, prop, w) = load("ZK Hats");
    let b = gen_injective_vcs(&sys, &prop, &w).unwrap();
    let r = discharge(&b, &solver(), &DischargeOptions::default());
    assert!(r.established(), "{}", show(&r));
}

fn mutate(dir: &str, from: &str, to: &str) -> (TransitionSystem, QhpProperty, EnumerationWitness) {
    let src = read(dir, "enumeration.sexp");
    assert!(src.contains(from), "mutation anchor `{}` missing", from);
    let (sys, prop, _) = load(dir);
    (sys, prop, parse_witness_str(&src.replacen(from, to, 1)).unwrap())
}

fn run(kind: BundleKind, (sys, prop, w): (TransitionSystem, QhpProperty, EnumerationWitness)) -> DischargeReport {
    let b = match kind {
        BundleKind::Injective => gen_injective_vcs(&sys, &prop, &w).unwrap(),
        BundleKind::Surjective => gen_surjective_vcs(&sys, &prop, &w).unwrap(),
    };
    discharge(&b, &solver(), &DischargeOptions::default())
}

fn run_mutant(kind: BundleKind, (sys, prop, w): (TransitionSystem, QhpProperty, EnumerationWitness)) -> DischargeReport {
    let b = match kind {
        BundleKind::Injective => gen_injective_vcs(&sys, &prop, &w).unwrap(),
        BundleKind::Surjective => gen_surjective_vcs(&sys, &prop, &w).unwrap(),
    };
    discharge(&b, &solver_ms(8_000), &DischargeOptions::default())
}

#[test]
fn zk_identity_skolem_fails_existence_base() {
    let m = mutate("ZK Hats", "(P (lambda ((j Int)) (ite (= (select e j) 0) (select P@1 j) (- 1 (select P@1 j)))))", "(P P@1)");
    let r = run(BundleKind::Injective, m);
    assert_eq!(r.first_failure().map(|o| o.label.as_str()), Some("existence-base"), "{}", show(&r));
    assert!(matches!(r.get("existence-base").unwrap().verdict, ObligationVerdict::Failed(Some(_))));
}

#[test]
fn zk_without_rank_cannot_show_distinctness() {
    let m = mutate("ZK Hats", "(rank (- d i@1))", "");
    let r = run(BundleKind::Injective, m);
    assert!(!r.established());
    assert_eq!(r.first_failure().unwrap().label, "distinctness/base");
}

#[test]
fn zk_surjective_direction_fails_on_failing_pivots() {
    // A pivot that is caught already relates every response vector, the
    // all-zero flip included, which Valid excludes.
    let (sys, prop, mut w) = load("ZK Hats");
    w.cover.insert(
        "e".into(),
        parse_witness_str(
            "(enumeration (enum-vars (e Int)) (valid true) (trel true)
               (cover (e (lambda ((j Int)) (ite (= (select P@1 j) (select P@2 j)) 0 1)))))",
        )
        .unwrap()
        .cover["e"]
            .clone(),
    );
    let r = run(BundleKind::Surjective, (sys, prop, w));
    assert_eq!(r.first_failure().map(|o| o.label.as_str()), Some("surj-cover-base"), "{}", show(&r));
}

#[test]
fn missing_skolem_is_reported() {
    let (sys, prop, mut w) = load("ZK Hats");
    w.skolem.remove("success");
    assert!(matches!(gen_injective_vcs(&sys, &prop, &w), Err(EnumError::MissingWitness(_))));
    w.cover.clear();
    assert!(matches!(gen_surjective_vcs(&sys, &prop, &w), Err(EnumError::MissingWitness(_))));
}

#[test]
fn ill_sorted_witness_is_rejected() {
    let (sys, prop, _) = load("ZK Hats");
    let w = parse_witness_str(&read("ZK Hats", "enumeration.sexp").replace("(= i@1 i@2)", "(= i@1 C@2)")).unwrap();
    assert!(matches!(gen_injective_vcs(&sys, &prop, &w), Err(EnumError::Sort { .. })));
}

#[test]
fn bundle_labels_are_fixed() {
    let (sys, prop, w) = load("ZK Hats");
    let labels: Vec<String> = gen_injective_vcs(&sys, &prop, &w).unwrap().obligations.into_iter().map(|o| o.label).collect();
    assert_eq!(
        labels,
        [
            "existence-base",
            "totality-of-witness",
            "existence-step",
            "distinctness/diff-exists",
            "distinctness/base",
            "distinctness/step"
        ]
    );
}

#[test]
fn purse_injective_bundle_is_established() {
    let r = run(BundleKind::Injective, load("Electronic Purse"));
    assert!(r.established(), "{}", show(&r));
}

#[test]
fn password_surjective_bundle_is_established() {
    let r = run(BundleKind::Surjective, load("Password checker"));
    assert!(r.established(), "{}", show(&r));
}

#[test]
fn shuffle_injective_bundle_is_established() {
    let r = run(BundleKind::Injective, load("F-Y Array Shuffle"));
    assert!(r.established(), "{}", show(&r));
}

#[test]
fn oram_injective_bundle_is_established() {
    let r = run(BundleKind::Injective, load("Path ORAM"));
    assert!(r.established(), "{}", show(&r));
}

#[test]
fn password_unlinked_passwords_are_not_distinct() {
    let m = mutate(
        "Password checker",
        "(forall ((j Int))
           (= (select pwd@2 j) (ite (= (select e j) 0) (select pwd@1 j) (- 1 (select pwd@1 j)))))",
        "true",
    );
    let r = run_mutant(BundleKind::Surjective, m);
    assert!(r.first_failure().is_some_and(|o| o.label.starts_with("surj-distinct")), "{}", show(&r));
}

#[test]
fn password_valid_without_existential_still_discharges() {
    // The all-zero vector only relates a pivot to itself, which the diff
    // condition never counts, so dropping the conjunct keeps the bundle sound;
    // the slack shows up in the count instead.
    let m = mutate("Password checker", "(exists ((j Int)) (and (<= 1 j) (<= j n) (distinct (select e j) 0)))", "true");
    let r = run(BundleKind::Surjective, m);
    assert!(r.established(), "{}", show(&r));
}

#[test]
fn shuffle_needs_distinct_array_values() {
    let m = mutate(
        "F-Y Array Shuffle",
        "(forall ((a Int) (b Int)) (=> (and (<= 0 a) (< a b) (< b n@2)) (distinct (select A@2 a) (select A@2 b))))))",
        "))",
    );
    let r = run_mutant(BundleKind::Injective, m);
    assert!(!r.established());
    assert!(r.first_failure().unwrap().label.starts_with("distinctness"), "{}", show(&r));
}

#[test]
fn oram_identity_layout_fails_existence() {
    let m = mutate("Path ORAM", "(loc (lambda ((j Int)) (select loc@1 (select Y j))))", "(loc loc@1)");
    let r = run_mutant(BundleKind::Injective, m);
    assert_eq!(r.first_failure().map(|o| o.label.as_str()), Some("existence-base"), "{}", show(&r));
}
