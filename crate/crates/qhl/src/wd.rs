use std::collections::BTreeSet;

use term_core::{retag, CmpOp, Tag, Term, Var};
use transition_system::TransitionSystem;

use crate::ast::QhpProperty;

#[derive(Clone, Debug, PartialEq)]
pub enum WellDefined {
    Ok,
    Rejected(String),
}

/// `f` from a body of the form `f@1 ≠ f@2` (either orientation).
pub(crate) fn difference_term(body: &Term) -> Option<Term> {
    let (a, b) = match body {
        Term::Cmp(CmpOp::Ne, a, b) => (a, b),
        Term::Not(inner) => match inner.as_ref() {
            Term::Cmp(CmpOp::Eq, a, b) => (a, b),
            _ => return None,
        },
        _ => return None,
    };
    for (x, y) in [(a, b), (b, a)] {
        if let Ok(y1) = retag(y, Tag::Indexed(2), Tag::Indexed(1)) {
            if &y1 == x.as_ref() && retag(x, Tag::Indexed(1), Tag::Plain).is_ok() {
                return retag(x, Tag::Indexed(1), Tag::Plain).ok();
            }
        }
    }
    None
}

fn eq_pair(c: &Term, z: &str, p0: u32, p1: u32) -> bool {
    let v = |i| Term::Var(Var::new(z, Tag::Indexed(i)));
    match c {
        Term::Cmp(CmpOp::Eq, a, b) => (**a == v(p0) && **b == v(p1)) || (**a == v(p1) && **b == v(p0)),
        _ => false,
    }
}

fn deep_conjuncts(t: &Term) -> Vec<&Term> {
    t.conjuncts().into_iter().flat_map(|c| if matches!(c, Term::And(_)) { deep_conjuncts(c) } else { vec![c] }).collect()
}

impl QhpProperty {
    /// The term `f` of a well-shaped difference predicate, over plain variables.
    pub fn difference_term(&self) -> Option<Term> {
        self.delta().filter(|p| p.args.len() == 2 && p.args[0] != p.args[1]).and_then(|p| difference_term(&p.body))
    }
}

/// Syntactic checks that make `¬Δ` an equivalence relation and pin the
/// parameters of counted traces to those of `π₀`.
pub fn check_well_defined(p: &QhpProperty, sys: &TransitionSystem) -> WellDefined {
    let known: BTreeSet<&str> = sys.vars.iter().map(|(n, _)| n.as_str()).collect();
    let mut stray = None;
    for f in [&p.diff, &p.body] {
        f.visit(&mut |pred| {
            for v in pred.body.free_vars() {
                if !known.contains(v.base.as_str()) && stray.is_none() {
                    stray = Some(v.base.clone());
                }
            }
        });
    }
    if let Some(s) = stray {
        return WellDefined::Rejected(format!("unknown state variable `{}`", s));
    }
    for v in p.bound.free_vars() {
        if v.tag != Tag::Plain || !sys.params.contains(&v.base) {
            return WellDefined::Rejected(format!("bound mentions `{}`, which is not a parameter", v));
        }
    }
    if p.difference_term().is_none() {
        return WellDefined::Rejected("Δ not a difference pattern F(f(s₁) ≠ f(s₂))".into());
    }
    let Some(psi) = p.psi() else {
        return WellDefined::Rejected("ψ is not of the form G(pred)".into());
    };
    let pos = |t: &String| psi.args.iter().position(|a| a == t).map(|i| i as u32 + 1);
    let (Some(p0), Some(p1)) = (pos(&p.forall), pos(&p.count)) else {
        return WellDefined::Rejected("ψ must relate the universal and the counted trace".into());
    };
    let cs = deep_conjuncts(&psi.body);
    for z in &sys.params {
        if !cs.iter().any(|c| eq_pair(c, z, p0, p1)) {
            return WellDefined::Rejected(format!("ψ does not force parameter `{}` equal across traces", z));
        }
    }
    WellDefined::Ok
}
