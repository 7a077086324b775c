use std::collections::{BTreeMap, BTreeSet};

use smt_backend::{Backend, Model, Query, Status};
use term_core::{Signature, Sort, Tag, Term, Var};

use crate::system::{prime_state, ComposedSystem, TransitionSystem};

#[derive(Clone, Debug, PartialEq)]
pub enum Validity {
    Valid,
    Invalid(Option<Model>),
    Unknown(String),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

fn declare(q: &mut Query, env: &BTreeMap<Var, Sort>, sig: &Signature) {
    for s in &sig.sorts {
        q.declare_sort(s);
    }
    let used: BTreeSet<String> = q.assertions.iter().flat_map(|a| a.applied_symbols()).collect();
    let consts: BTreeSet<Var> = q.assertions.iter().flat_map(|a| a.free_vars()).collect();
    for (f, (args, ret)) in &sig.functions {
        if used.contains(f) || (args.is_empty() && consts.contains(&Var::plain(f.clone()))) {
            q.declare_fun(f, args.clone(), ret.clone());
        }
    }
    q.declare_from(env);
}

/// Decide `hyps ⇒ goal` by asking for a model of `hyps ∧ ¬goal`.
/// Returns the verdict and the solver wall time.
pub fn check_valid(
    label: &str,
    hyps: &[Term],
    goal: &Term,
    env: &BTreeMap<Var, Sort>,
    sig: &Signature,
    backend: &dyn Backend,
) -> (Validity, u64) {
    check_valid_with(label, hyps, goal, env, sig, &[], backend)
}

/// [`check_valid`] with extra solver options.
pub fn check_valid_with(
    label: &str,
    hyps: &[Term],
    goal: &Term,
    env: &BTreeMap<Var, Sort>,
    sig: &Signature,
    options: &[(String, String)],
    backend: &dyn Backend,
) -> (Validity, u64) {
    let mut q = Query::new(label).with_model();
    q.options = options.to_vec();
    for h in hyps {
        q.assert(h.clone());
    }
    q.assert(Term::not(goal.clone()));
    declare(&mut q, env, sig);
    match backend.solve(&q) {
        Ok(v) => {
            let verdict = match v.status {
                Status::Unsat => Validity::Valid,
                Status::Sat => Validity::Invalid(v.model),
                Status::Unknown => Validity::Unknown(v.reason.unwrap_or_else(|| "solver returned unknown".into())),
            };
            (verdict, v.wall_time_ms)
        }
        Err(e) => (Validity::Unknown(e.to_string()), 0),
    }
}

/// Relational invariant to be proved by 1-induction. `rigid` variables are
/// shared by both states of a step and never primed.
#[derive(Clone, Debug)]
pub struct InductiveObligation {
    pub label: String,
    pub state: BTreeMap<Var, Sort>,
    pub rigid: BTreeMap<Var, Sort>,
    pub sig: Signature,
    /// Background facts assumed in both queries.
    pub axioms: Vec<Term>,
    pub init: Term,
    pub tx: Term,
    pub invariant: Term,
    pub auxiliaries: Vec<Term>,
}

impl InductiveObligation {
    pub fn for_system(ts: &TransitionSystem, invariant: Term, auxiliaries: Vec<Term>) -> InductiveObligation {
        InductiveObligation {
            label: ts.name.clone(),
            state: ts.env(Tag::Plain),
            rigid: BTreeMap::new(),
            sig: ts.sig.clone(),
            axioms: vec![],
            init: ts.init.clone(),
            tx: ts.tx.clone(),
            invariant,
            auxiliaries,
        }
    }

    pub fn for_composed(cs: &ComposedSystem, invariant: Term, auxiliaries: Vec<Term>) -> InductiveObligation {
        InductiveObligation {
            label: format!("{}^{}", cs.base.name, cs.k),
            state: cs.env(),
            rigid: BTreeMap::new(),
            sig: cs.base.sig.clone(),
            axioms: vec![],
            init: cs.init(),
            tx: cs.tx(),
            invariant,
            auxiliaries,
        }
    }

    pub fn phi(&self) -> Term {
        let mut v = vec![self.invariant.clone()];
        v.extend(self.auxiliaries.iter().cloned());
        Term::and(v)
    }

    pub fn prime(&self, t: &Term) -> Term {
        prime_state(t, &self.state.keys().cloned().collect())
    }

    pub fn full_env(&self) -> BTreeMap<Var, Sort> {
        let mut env = self.rigid.clone();
        for (v, s) in &self.state {
            env.insert(v.clone(), s.clone());
            if let Some(p) = v.tag.primed() {
                env.insert(v.with_tag(p), s.clone());
            }
        }
        env
    }

    pub fn base_query(&self) -> (Vec<Term>, Term) {
        let mut hyps = self.axioms.clone();
        hyps.push(self.init.clone());
        (hyps, self.phi())
    }

    pub fn step_query(&self) -> (Vec<Term>, Term) {
        let phi = self.phi();
        let mut hyps = self.axioms.clone();
        hyps.push(phi.clone());
        hyps.push(self.tx.clone());
        (hyps, self.prime(&phi))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InductiveResult {
    Proved,
    BaseFails(Option<Model>),
    StepFails(Option<Model>),
    Unknown(String),
}

/// Both 1-induction queries; the second is skipped when the first fails.
pub fn check_inductive(ob: &InductiveObligation, backend: &dyn Backend) -> (InductiveResult, u64) {
    let env = ob.full_env();
    let (h, g) = ob.base_query();
    let (base, t1) = check_valid(&format!("{}/base", ob.label), &h, &g, &env, &ob.sig, backend);
    match base {
        Validity::Valid => {}
        Validity::Invalid(m) => return (InductiveResult::BaseFails(m), t1),
        Validity::Unknown(r) => return (InductiveResult::Unknown(r), t1),
    }
    let (h, g) = ob.step_query();
    let (step, t2) = check_valid(&format!("{}/step", ob.label), &h, &g, &env, &ob.sig, backend);
    let r = match step {
        Validity::Valid => InductiveResult::Proved,
        Validity::Invalid(m) => InductiveResult::StepFails(m),
        Validity::Unknown(r) => InductiveResult::Unknown(r),
    };
    (r, t1 + t2)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Totality {
    Total,
    NotTotal(Option<Model>),
    Unknown(String),
}

/// Replace primed state variables by fresh bound names; returns the
/// binder list and the rewritten formula.
pub(crate) fn bind_primed(tx: &Term, vars: &[(String, Sort)]) -> (Vec<(String, Sort)>, Term) {
    let taken: BTreeSet<String> = tx.free_vars().into_iter().map(|v| v.base).collect();
    let mut binder = Vec::new();
    let mut map = BTreeMap::new();
    for (n, s) in vars {
        let fresh = (0..).map(|k| format!("{}_next{}", n, k)).find(|c| !taken.contains(c)).unwrap();
        map.insert(Var::new(n.clone(), Tag::Primed), Term::Var(Var::plain(fresh.clone())));
        binder.push((fresh, s.clone()));
    }
    (binder, tx.subst(&map))
}

/// Every state has a successor: `¬∃X!. tx` must be unsatisfiable.
pub fn check_totality(ts: &TransitionSystem, backend: &dyn Backend) -> (Totality, u64) {
    let (binder, body) = bind_primed(&ts.tx, &ts.vars);
    let (v, t) =
        check_valid(&format!("{}/totality", ts.name), &[], &Term::exists(binder, body), &ts.env(Tag::Plain), &ts.sig, backend);
    let r = match v {
        Validity::Valid => Totality::Total,
        Validity::Invalid(m) => Totality::NotTotal(m),
        Validity::Unknown(r) => Totality::Unknown(r),
    };
    (r, t)
}
