use std::collections::BTreeMap;
use std::fmt;

use term_core::{rename_free, Tag, Term};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QhlError {
    #[error("{0}")]
    Syntax(String),
    #[error("no copy assigned to trace variable `{0}`")]
    MissingAssignment(String),
}

/// k-ary state predicate. Argument `args[p]` is read through the variables
/// tagged `@(p+1)` in `body`.
#[derive(Clone, Debug, PartialEq)]
pub struct StatePredicate {
    pub args: Vec<String>,
    pub body: Term,
}

impl StatePredicate {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HyperLtl {
    Const(bool),
    Pred(StatePredicate),
    Not(Box<HyperLtl>),
    And(Vec<HyperLtl>),
    Or(Vec<HyperLtl>),
    Implies(Box<HyperLtl>, Box<HyperLtl>),
    Next(Box<HyperLtl>),
    Until(Box<HyperLtl>, Box<HyperLtl>),
    Finally(Box<HyperLtl>),
    Globally(Box<HyperLtl>),
}

impl HyperLtl {
    /// Trace variables mentioned anywhere, in first-occurrence order.
    pub fn trace_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |p| {
            for a in &p.args {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        });
        out
    }

    pub fn visit(&self, f: &mut dyn FnMut(&StatePredicate)) {
        match self {
            HyperLtl::Const(_) => {}
            HyperLtl::Pred(p) => f(p),
            HyperLtl::Not(a) | HyperLtl::Next(a) | HyperLtl::Finally(a) | HyperLtl::Globally(a) => a.visit(f),
            HyperLtl::And(v) | HyperLtl::Or(v) => v.iter().for_each(|x| x.visit(f)),
            HyperLtl::Implies(a, b) | HyperLtl::Until(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl Comparator {
    pub fn keyword(self) -> &'static str {
        match self {
            Comparator::Le => "leq",
            Comparator::Eq => "eq",
            Comparator::Ge => "geq",
        }
    }

    pub fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ge => lhs >= rhs,
        }
    }

    /// `lhs ◁ rhs` as a formula.
    pub fn term(self, lhs: Term, rhs: Term) -> Term {
        match self {
            Comparator::Le => Term::le(lhs, rhs),
            Comparator::Eq => Term::eq(lhs, rhs),
            Comparator::Ge => Term::ge(lhs, rhs),
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// `∀π₀. #π₁: Δ. ψ ◁ N(Z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QhpProperty {
    pub forall: String,
    pub count: String,
    pub diff: HyperLtl,
    pub body: HyperLtl,
    pub cmp: Comparator,
    pub bound: Term,
}

impl QhpProperty {
    /// The single predicate under the top-level operator of `f`, if `f`
    /// has that shape.
    fn inner_pred(f: &HyperLtl) -> Option<&StatePredicate> {
        match f {
            HyperLtl::Finally(a) | HyperLtl::Globally(a) => match a.as_ref() {
                HyperLtl::Pred(p) => Some(p),
                _ => None,
            },
            _ => None,
        }
    }

    /// δ of `F(δ)`.
    pub fn delta(&self) -> Option<&StatePredicate> {
        match &self.diff {
            HyperLtl::Finally(_) => Self::inner_pred(&self.diff),
            _ => None,
        }
    }

    /// ψ of `G(ψ)`.
    pub fn psi(&self) -> Option<&StatePredicate> {
        match &self.body {
            HyperLtl::Globally(_) => Self::inner_pred(&self.body),
            _ => None,
        }
    }

    /// ψ with π₀ on copy `c0` and π₁ on copy `c1`.
    pub fn psi_on(&self, c0: u32, c1: u32) -> Result<Term, QhlError> {
        let p = self.psi().ok_or_else(|| QhlError::Syntax("body is not G(pred)".into()))?;
        let m = BTreeMap::from([(self.forall.clone(), Tag::Indexed(c0)), (self.count.clone(), Tag::Indexed(c1))]);
        predicate_to_formula(p, &m)
    }

    /// δ with its two trace arguments on copies `a` and `b`.
    pub fn delta_on(&self, a: u32, b: u32) -> Result<Term, QhlError> {
        let p = self.delta().ok_or_else(|| QhlError::Syntax("difference is not F(pred)".into()))?;
        if p.args.len() != 2 {
            return Err(QhlError::Syntax("difference predicate is not binary".into()));
        }
        let m = BTreeMap::from([(p.args[0].clone(), Tag::Indexed(a)), (p.args[1].clone(), Tag::Indexed(b))]);
        predicate_to_formula(p, &m)
    }
}

/// Instantiate a predicate: `x@p` becomes `x` under the tag of the p-th
/// argument, and `x@p!` its primed counterpart.
pub fn predicate_to_formula(pred: &StatePredicate, assignment: &BTreeMap<String, Tag>) -> Result<Term, QhlError> {
    let mut tags = Vec::new();
    for a in &pred.args {
        tags.push(*assignment.get(a).ok_or_else(|| QhlError::MissingAssignment(a.clone()))?);
    }
    Ok(rename_free(&pred.body, &|v| match v.tag {
        Tag::Indexed(p) => tags.get((p as usize).wrapping_sub(1)).map(|t| v.with_tag(*t)),
        Tag::IndexedPrimed(p) => tags.get((p as usize).wrapping_sub(1)).and_then(|t| t.primed()).map(|t| v.with_tag(t)),
        _ => None,
    }))
}
