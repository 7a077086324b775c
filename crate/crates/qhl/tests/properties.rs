use std::collections::BTreeMap;

use qhl::*;
use term_core::{parse_term_str, Tag, Term};
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

#[test]
fn zk_soundness_is_well_defined() {
    assert_eq!(check_well_defined(&property("ZK Hats"), &system("ZK Hats")), WellDefined::Ok);
}

#[test]
fn true_difference_is_rejected() {
    let mut p = property("ZK Hats");
    p.diff = HyperLtl::Const(true);
    match check_well_defined(&p, &system("ZK Hats")) {
        WellDefined::Rejected(r) => assert!(r.starts_with("Δ not a difference pattern"), "{}", r),
        ok => panic!("{:?}", ok),
    }
}

#[test]
fn deniability_template_is_well_defined() {
    assert_eq!(check_well_defined(&property("Electronic Purse"), &system("Electronic Purse")), WellDefined::Ok);
}

#[test]
fn missing_parameter_equality_is_rejected() {
    let src = read("ZK Hats", "property.sexp").replace("(= R@1 R@2)", "true");
    let p = parse_property_str(&src).unwrap();
    assert!(matches!(check_well_defined(&p, &system("ZK Hats")), WellDefined::Rejected(r) if r.contains("`R`")));
}

#[test]
fn difference_must_compare_the_same_term() {
    let src = read("Electronic Purse", "property.sexp").replace("(distinct balance@1 balance@2)", "(distinct balance@1 steps@2)");
    let p = parse_property_str(&src).unwrap();
    assert!(matches!(check_well_defined(&p, &system("Electronic Purse")), WellDefined::Rejected(_)));
    let src =
        read("Electronic Purse", "property.sexp").replace("(distinct balance@1 balance@2)", "(not (= balance@2 balance@1))");
    assert_eq!(check_well_defined(&parse_property_str(&src).unwrap(), &system("Electronic Purse")), WellDefined::Ok);
}

#[test]
fn renaming_trace_variables_keeps_the_verdict() {
    let src = read("ZK Hats", "property.sexp").replace("t0", "u").replace("t1", "w").replace("ta", "p").replace("tb", "q");
    assert_eq!(check_well_defined(&parse_property_str(&src).unwrap(), &system("ZK Hats")), WellDefined::Ok);
}

#[test]
fn parse_errors() {
    let bad = [
        "(qhp (forall t0) (count t0 :diff true :body true :cmp geq :bound 1))",
        "(qhp (forall t0) (count t1 :diff true :body (globally (count t2)) :cmp geq :bound 1))",
        "(qhp (forall t0) (count t1 :diff true :body true :cmp lt :bound R))",
        "(qhp (forall t0) (count t1 :diff true :body (globally (pred (t0 t1) x@3)) :cmp geq :bound 1))",
        "(qhp (forall t0) (count t1 :diff true :body (globally (pred (t0 t9) true)) :cmp geq :bound 1))",
    ];
    for b in bad {
        assert!(parse_property_str(b).is_err(), "{}", b);
    }
    let p = parse_property_str("(qhp (forall t0) (count t1 :diff true :body true :cmp gt :bound 3))").unwrap();
    assert_eq!((p.cmp, p.bound), (Comparator::Ge, Term::int(4)));
}

#[test]
fn psi_instantiates_over_two_copies() {
    let p = property("ZK Hats");
    let f = p.psi_on(1, 2).unwrap();
    let tags: Vec<Tag> = f.free_vars().into_iter().map(|v| v.tag).collect();
    assert!(tags.iter().all(|t| matches!(t, Tag::Indexed(1) | Tag::Indexed(2))));
    let m = BTreeMap::from([("t0".to_string(), Tag::Indexed(1))]);
    assert_eq!(predicate_to_formula(p.psi().unwrap(), &m), Err(QhlError::MissingAssignment("t1".into())));
}

#[test]
fn delta_on_one_copy_is_reflexively_false() {
    let p = property("ZK Hats");
    let d = p.delta_on(1, 1).unwrap();
    assert_eq!(d, parse_term_str("(distinct (select P@1 i@1) (select P@1 i@1))").unwrap());
}
