use std::collections::BTreeMap;

use proptest::prelude::*;
use term_core::*;

fn t(s: &str) -> Term {
    parse_term_str(s).unwrap()
}

fn env(pairs: &[(&str, &str)]) -> BTreeMap<Var, Sort> {
    pairs.iter().map(|(v, s)| (Var::from_symbol(v), parse_sort_str(s).unwrap())).collect()
}

#[test]
fn literal_sum_is_integer() {
    assert_eq!(check_sorts(&t("(+ 1 2)"), &Signature::new(), &BTreeMap::new()), Ok(Sort::Int));
}

#[test]
fn cross_sort_equality_rejected() {
    let e = env(&[("b", "Bool")]);
    assert!(matches!(check_sorts(&t("(= b 1)"), &Signature::new(), &e), Err(SortError::RankMismatch { .. })));
}

#[test]
fn select_from_int_array() {
    let e = env(&[("pmap", "(Array Int Int)"), ("j", "Int")]);
    assert_eq!(check_sorts(&t("(select pmap j)"), &Signature::new(), &e), Ok(Sort::Int));
}

#[test]
fn sort_errors_are_specific() {
    let sig = Signature::new();
    let e = env(&[("x", "Int")]);
    assert_eq!(check_sorts(&t("(f x)"), &sig, &e), Err(SortError::UnknownSymbol("f".into())));
    assert_eq!(check_sorts(&t("(+ x z)"), &sig, &e), Err(SortError::UnboundVariable(Var::plain("z"))));
    assert!(matches!(check_sorts(&t("(* x x)"), &sig, &e), Err(SortError::NonLinear(_))));
    assert_eq!(check_sorts(&t("(* 3 x)"), &sig, &e), Ok(Sort::Int));
    assert_eq!(check_sorts(&t("(forall ((x Bool)) x)"), &sig, &e), Ok(Sort::Bool));
    let mut sig = Signature::new();
    sig.declare_fun("pow2", vec![Sort::Int], Sort::Int).unwrap();
    assert!(sig.declare_fun("pow2", vec![], Sort::Int).is_err());
    assert_eq!(check_sorts(&t("(pow2 x)"), &sig, &e), Ok(Sort::Int));
    assert!(matches!(check_sorts(&t("(pow2 x x)"), &sig, &e), Err(SortError::RankMismatch { .. })));
}

#[test]
fn substitute_examples() {
    let sig = Signature::new();
    let e = env(&[("x", "Int"), ("y", "Int"), ("i", "Int"), ("R", "Int"), ("e", "(Array Int Int)")]);
    let m = |v: &str, r: &str| BTreeMap::from([(Var::from_symbol(v), t(r))]);
    assert_eq!(substitute(&t("(+ x 1)"), &m("x", "4"), &sig, &e).unwrap(), t("(+ 4 1)"));
    let q = t("(forall ((x Int)) (>= (+ x y) 0))");
    assert_eq!(substitute(&q, &m("x", "0"), &sig, &e).unwrap(), q);
    let got = substitute(&t("(distinct (select e i) 0)"), &m("i", "(+ R 1)"), &sig, &e).unwrap();
    // Compare against an independent parse of the expected text.
    assert_eq!(got, parse_term(&parse_sexps("(distinct (select e (+ R 1)) 0)").unwrap()[0]).unwrap());
    assert!(matches!(substitute(&t("(+ x 1)"), &m("x", "true"), &sig, &e), Err(SubstError::SortMismatch { .. })));
}

#[test]
fn substitution_avoids_capture() {
    let q = t("(exists ((y Int)) (< x y))");
    let out = q.subst(&BTreeMap::from([(Var::plain("x"), t("(+ y 1)"))]));
    assert_eq!(out, t("(exists ((y_1 Int)) (< (+ y 1) y_1))"));
    assert!(out.free_vars().contains(&Var::plain("y")));
}

#[test]
fn retag_examples() {
    let f = t("(>= balance decr)");
    let r = retag(&f, Tag::Plain, Tag::Indexed(1)).unwrap();
    assert_eq!(r.to_string(), "(>= balance@1 decr@1)");
    assert_eq!(retag(&r, Tag::Indexed(1), Tag::Plain).unwrap(), f);
    let hand = Term::Var(Var::new("success", Tag::Indexed(2)));
    assert_eq!(retag(&t("success!"), Tag::Primed, Tag::Indexed(2)).unwrap(), hand);
    assert!(matches!(retag(&t("(+ x y!)"), Tag::Plain, Tag::Primed), Err(RetagError::TagMismatch { .. })));
}

#[test]
fn negative_literals_and_patterns_print_canonically() {
    let s = "(forall ((n Int)) (! (=> (>= n 1) (= (pow2 n) (* 2 (pow2 (- n 1))))) :pattern ((pow2 n))))";
    assert_eq!(t(s).to_string(), s);
    assert_eq!(t("(- 5)"), Term::int(-5));
    assert_eq!(Term::int(-5).to_string(), "(- 5)");
    assert_eq!(t("(distinct a b c)").to_string(), "(and (distinct a b) (distinct a c) (distinct b c))");
}

fn leaf_int() -> impl Strategy<Value = Term> {
    prop_oneof![(-20i64..20).prop_map(Term::int), Just(t("x")), Just(t("y@1")), Just(t("(select a x)")),]
}

fn int_term() -> impl Strategy<Value = Term> {
    leaf_int().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sub(a, b)),
            (-3i64..4, inner.clone()).prop_map(|(k, a)| Term::mul(Term::int(k), a)),
            inner.clone().prop_map(Term::neg),
            (inner.clone(), inner.clone()).prop_map(|(i, v)| Term::select(Term::store(t("a"), i, v), t("x"))),
        ]
    })
}

fn bool_term() -> impl Strategy<Value = Term> {
    let atom = prop_oneof![
        Just(t("b")),
        any::<bool>().prop_map(Term::Bool),
        (int_term(), int_term()).prop_map(|(a, b)| Term::le(a, b)),
        (int_term(), int_term()).prop_map(|(a, b)| Term::ne(a, b)),
    ];
    atom.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Term::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Term::Or),
            inner.clone().prop_map(Term::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::implies(a, b)),
            (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, a, b)| Term::ite(c, a, b)),
            inner.clone().prop_map(|b| Term::forall(vec![("x".into(), Sort::Int)], b)),
            (inner.clone(), int_term())
                .prop_map(|(b, i)| Term::exists(vec![("z".into(), Sort::Int)], Term::and(vec![b, Term::eq(t("z"), i)]))),
        ]
    })
}

fn base_env() -> BTreeMap<Var, Sort> {
    env(&[("x", "Int"), ("y@1", "Int"), ("b", "Bool"), ("a", "(Array Int Int)")])
}

proptest! {
    #[test]
    fn emit_parse_round_trip(f in bool_term()) {
        let text = f.to_string();
        prop_assert_eq!(parse_term_str(&text).unwrap(), f);
    }

    #[test]
    fn substitution_preserves_sorts(f in bool_term(), r in int_term()) {
        let e = base_env();
        prop_assert_eq!(check_sorts(&f, &Signature::new(), &e), Ok(Sort::Bool));
        let g = substitute(&f, &BTreeMap::from([(Var::plain("x"), r)]), &Signature::new(), &e).unwrap();
        prop_assert_eq!(check_sorts(&g, &Signature::new(), &e), Ok(Sort::Bool));
    }

    #[test]
    fn substitution_composes(f in bool_term(), r1 in int_term(), r2 in int_term()) {
        // rho binds x with a range free of b; sigma binds b. Disjoint domains and ranges.
        let rho = BTreeMap::from([(Var::plain("x"), r1.clone())]);
        let sigma = BTreeMap::from([(Var::plain("b"), Term::le(r2.clone(), Term::int(0)))]);
        let composed: BTreeMap<Var, Term> = rho.iter().map(|(k, v)| (k.clone(), v.subst(&sigma)))
            .chain(sigma.clone()).collect();
        prop_assert_eq!(f.subst(&composed), f.subst(&rho).subst(&sigma));
    }

    #[test]
    fn retag_preserves_sorts_and_inverts(f in bool_term()) {
        let plain = rename_free(&f, &|v| Some(v.with_tag(Tag::Plain)));
        let e: BTreeMap<Var, Sort> = env(&[("x", "Int"), ("y", "Int"), ("b", "Bool"), ("a", "(Array Int Int)")]);
        let e2: BTreeMap<Var, Sort> = e.iter().map(|(k, v)| (k.with_tag(Tag::Indexed(2)), v.clone())).collect();
        let moved = retag(&plain, Tag::Plain, Tag::Indexed(2)).unwrap();
        prop_assert_eq!(check_sorts(&moved, &Signature::new(), &e2), Ok(Sort::Bool));
        prop_assert_eq!(retag(&moved, Tag::Indexed(2), Tag::Plain).unwrap(), plain);
    }
}
