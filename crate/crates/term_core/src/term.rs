use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::sort::Sort;
use crate::var::{Tag, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "distinct",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

/// Sorted first-order term. Formulas are boolean-sorted terms; `=` over
/// booleans doubles as the biconditional.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Int(BigInt),
    Bool(bool),
    App(String, Vec<Term>),
    Add(Vec<Term>),
    /// Left-associative subtraction with at least two operands.
    Sub(Vec<Term>),
    Neg(Box<Term>),
    Mul(Vec<Term>),
    Div(Box<Term>, Box<Term>),
    Mod(Box<Term>, Box<Term>),
    Cmp(CmpOp, Box<Term>, Box<Term>),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    Select(Box<Term>, Box<Term>),
    Store(Box<Term>, Box<Term>, Box<Term>),
    Quant {
        q: Quantifier,
        vars: Vec<(String, Sort)>,
        body: Box<Term>,
        /// Instantiation patterns, emitted as `:pattern` attributes.
        patterns: Vec<Vec<Term>>,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum SubstError {
    #[error("replacement for {var} has sort {found}, expected {expected}")]
    SortMismatch { var: Var, expected: Sort, found: Sort },
    #[error("sort error in replacement for {0}: {1}")]
    Replacement(Var, String),
}

#[derive(Debug, Error, PartialEq)]
pub enum RetagError {
    #[error("free variable {var} carries tag {found}, expected {expected}")]
    TagMismatch { var: Var, expected: Tag, found: Tag },
}

// Builders named after the operators they construct.
#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn sym(name: &str) -> Term {
        Term::Var(Var::from_symbol(name))
    }

    pub fn int(n: impl Into<BigInt>) -> Term {
        Term::Int(n.into())
    }

    pub fn tt() -> Term {
        Term::Bool(true)
    }

    pub fn ff() -> Term {
        Term::Bool(false)
    }

    pub fn app(f: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(f.into(), args)
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Term {
        Term::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::cmp(CmpOp::Eq, a, b)
    }

    pub fn ne(a: Term, b: Term) -> Term {
        Term::cmp(CmpOp::Ne, a, b)
    }

    pub fn le(a: Term, b: Term) -> Term {
        Term::cmp(CmpOp::Le, a, b)
    }

    pub fn lt(a: Term, b: Term) -> Term {
        Term::cmp(CmpOp::Lt, a, b)
    }

    pub fn ge(a: Term, b: Term) -> Term {
        Term::cmp(CmpOp::Ge, a, b)
    }

    pub fn gt(a: Term, b: Term) -> Term {
        Term::cmp(CmpOp::Gt, a, b)
    }

    pub fn iff(a: Term, b: Term) -> Term {
        Term::eq(a, b)
    }

    pub fn not(a: Term) -> Term {
        Term::Not(Box::new(a))
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::Implies(Box::new(a), Box::new(b))
    }

    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        Term::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    pub fn select(a: Term, i: Term) -> Term {
        Term::Select(Box::new(a), Box::new(i))
    }

    pub fn store(a: Term, i: Term, v: Term) -> Term {
        Term::Store(Box::new(a), Box::new(i), Box::new(v))
    }

    /// Conjunction; collapses the empty and singleton cases.
    pub fn and(mut v: Vec<Term>) -> Term {
        match v.len() {
            0 => Term::tt(),
            1 => v.pop().unwrap(),
            _ => Term::And(v),
        }
    }

    pub fn or(mut v: Vec<Term>) -> Term {
        match v.len() {
            0 => Term::ff(),
            1 => v.pop().unwrap(),
            _ => Term::Or(v),
        }
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(vec![a, b])
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(vec![a, b])
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(vec![a, b])
    }

    /// Negation with literal folding, the only canonical form of `(- t)`.
    pub fn neg(a: Term) -> Term {
        match a {
            Term::Int(n) => Term::Int(-n),
            other => Term::Neg(Box::new(other)),
        }
    }

    pub fn forall(vars: Vec<(String, Sort)>, body: Term) -> Term {
        if vars.is_empty() {
            return body;
        }
        Term::Quant { q: Quantifier::Forall, vars, body: Box::new(body), patterns: vec![] }
    }

    pub fn exists(vars: Vec<(String, Sort)>, body: Term) -> Term {
        if vars.is_empty() {
            return body;
        }
        Term::Quant { q: Quantifier::Exists, vars, body: Box::new(body), patterns: vec![] }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Term::Int(n) => Some(n),
            _ => None,
        }
    }

    /// Top-level conjuncts, flattening nested `and`.
    pub fn conjuncts(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
            match t {
                Term::And(v) => v.iter().for_each(|c| go(c, out)),
                Term::Bool(true) => {}
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Direct children, in order. Quantifier patterns are not children.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::Int(_) | Term::Bool(_) => vec![],
            Term::App(_, a) | Term::Add(a) | Term::Sub(a) | Term::Mul(a) | Term::And(a) | Term::Or(a) => a.iter().collect(),
            Term::Neg(a) | Term::Not(a) => vec![a],
            Term::Div(a, b) | Term::Mod(a, b) | Term::Cmp(_, a, b) | Term::Implies(a, b) | Term::Select(a, b) => vec![a, b],
            Term::Ite(a, b, c) | Term::Store(a, b, c) => vec![a, b, c],
            Term::Quant { body, .. } => vec![body],
        }
    }

    /// Rebuild with children mapped by `f` (binders are left untouched).
    pub fn map_children(&self, f: &mut dyn FnMut(&Term) -> Term) -> Term {
        let b = |t: &Term, f: &mut dyn FnMut(&Term) -> Term| Box::new(f(t));
        match self {
            Term::Var(_) | Term::Int(_) | Term::Bool(_) => self.clone(),
            Term::App(n, a) => Term::App(n.clone(), a.iter().map(&mut *f).collect()),
            Term::Add(a) => Term::Add(a.iter().map(&mut *f).collect()),
            Term::Sub(a) => Term::Sub(a.iter().map(&mut *f).collect()),
            Term::Mul(a) => Term::Mul(a.iter().map(&mut *f).collect()),
            Term::And(a) => Term::And(a.iter().map(&mut *f).collect()),
            Term::Or(a) => Term::Or(a.iter().map(&mut *f).collect()),
            Term::Neg(a) => Term::Neg(b(a, f)),
            Term::Not(a) => Term::Not(b(a, f)),
            Term::Div(x, y) => Term::Div(b(x, f), b(y, f)),
            Term::Mod(x, y) => Term::Mod(b(x, f), b(y, f)),
            Term::Cmp(op, x, y) => Term::Cmp(*op, b(x, f), b(y, f)),
            Term::Implies(x, y) => Term::Implies(b(x, f), b(y, f)),
            Term::Select(x, y) => Term::Select(b(x, f), b(y, f)),
            Term::Ite(x, y, z) => Term::Ite(b(x, f), b(y, f), b(z, f)),
            Term::Store(x, y, z) => Term::Store(b(x, f), b(y, f), b(z, f)),
            Term::Quant { q, vars, body, patterns } => Term::Quant {
                q: *q,
                vars: vars.clone(),
                body: b(body, f),
                patterns: patterns.iter().map(|p| p.iter().map(&mut *f).collect()).collect(),
            },
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                if !(v.tag == Tag::Plain && bound.contains(&v.base)) {
                    out.insert(v.clone());
                }
            }
            Term::Quant { vars, body, patterns, .. } => {
                let n = bound.len();
                bound.extend(vars.iter().map(|(x, _)| x.clone()));
                body.collect_free(bound, out);
                for p in patterns.iter().flatten() {
                    p.collect_free(bound, out);
                }
                bound.truncate(n);
            }
            other => {
                for c in other.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    /// Names of every function symbol applied anywhere in the term.
    pub fn applied_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |t| {
            if let Term::App(f, _) = t {
                out.insert(f.clone());
            }
        });
        out
    }

    /// Pre-order traversal including quantifier bodies.
    pub fn walk(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Whether any subterm satisfies `p`.
    pub fn any(&self, p: &dyn Fn(&Term) -> bool) -> bool {
        p(self) || self.children().into_iter().any(|c| c.any(p))
    }

    pub fn has_quantifier(&self) -> bool {
        self.any(&|t| matches!(t, Term::Quant { .. }))
    }

    /// True when the term stays inside linear integer arithmetic.
    pub fn is_linear(&self) -> bool {
        !self.any(&|t| match t {
            Term::Mul(fs) => fs.iter().filter(|x| x.as_int().is_none()).count() > 1,
            Term::Div(_, d) | Term::Mod(_, d) => d.as_int().is_none(),
            _ => false,
        })
    }

    /// Capture-avoiding simultaneous substitution of free variables.
    pub fn subst(&self, map: &BTreeMap<Var, Term>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Quant { q, vars, body, patterns } => {
                let names: BTreeSet<&str> = vars.iter().map(|(n, _)| n.as_str()).collect();
                let mut inner: BTreeMap<Var, Term> = map
                    .iter()
                    .filter(|(k, _)| !(k.tag == Tag::Plain && names.contains(k.base.as_str())))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                if inner.is_empty() {
                    return self.clone();
                }
                let mut incoming = BTreeSet::new();
                for (k, v) in &inner {
                    if body_mentions(body, patterns, k) {
                        incoming.extend(v.free_vars());
                    }
                }
                let mut taken: BTreeSet<String> =
                    incoming.iter().filter(|v| v.tag == Tag::Plain).map(|v| v.base.clone()).collect();
                taken.extend(body.free_vars().into_iter().filter(|v| v.tag == Tag::Plain).map(|v| v.base));
                taken.extend(names.iter().map(|s| s.to_string()));
                let mut new_vars = Vec::with_capacity(vars.len());
                for (name, sort) in vars {
                    let clash = incoming.iter().any(|v| v.tag == Tag::Plain && v.base == *name);
                    if clash {
                        let fresh = fresh_name(name, &taken);
                        taken.insert(fresh.clone());
                        inner.insert(Var::plain(name.clone()), Term::Var(Var::plain(fresh.clone())));
                        new_vars.push((fresh, sort.clone()));
                    } else {
                        new_vars.push((name.clone(), sort.clone()));
                    }
                }
                Term::Quant {
                    q: *q,
                    vars: new_vars,
                    body: Box::new(body.subst(&inner)),
                    patterns: patterns.iter().map(|p| p.iter().map(|t| t.subst(&inner)).collect()).collect(),
                }
            }
            other => other.map_children(&mut |c| c.subst(map)),
        }
    }

    /// Map every free-variable occurrence through `f`; `None` keeps it.
    pub fn map_free_vars(&self, f: &dyn Fn(&Var) -> Option<Term>) -> Term {
        let map: BTreeMap<Var, Term> = self.free_vars().into_iter().filter_map(|v| f(&v).map(|t| (v, t))).collect();
        self.subst(&map)
    }

    /// Replace free occurrences of the plain variable `name`.
    pub fn instantiate_bound(&self, name: &str, with: &Term) -> Term {
        let mut m = BTreeMap::new();
        m.insert(Var::plain(name), with.clone());
        self.subst(&m)
    }
}

fn body_mentions(body: &Term, patterns: &[Vec<Term>], v: &Var) -> bool {
    body.free_vars().contains(v) || patterns.iter().flatten().any(|p| p.free_vars().contains(v))
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    (1..).map(|k| format!("{}_{}", base, k)).find(|n| !taken.contains(n)).unwrap()
}

/// Rename free variables through `f`. Bound variables are never touched.
pub fn rename_free(term: &Term, f: &dyn Fn(&Var) -> Option<Var>) -> Term {
    term.map_free_vars(&|v| f(v).map(Term::Var))
}

/// Sort-checked substitution: every replacement must carry the sort its
/// variable has in `env`.
pub fn substitute(
    term: &Term,
    bindings: &BTreeMap<Var, Term>,
    sig: &crate::Signature,
    env: &BTreeMap<Var, Sort>,
) -> Result<Term, SubstError> {
    for (v, t) in bindings {
        let Some(expected) = env.get(v) else { continue };
        let found = crate::check_sorts(t, sig, env).map_err(|e| SubstError::Replacement(v.clone(), e.to_string()))?;
        if &found != expected {
            return Err(SubstError::SortMismatch { var: v.clone(), expected: expected.clone(), found });
        }
    }
    Ok(term.subst(bindings))
}

/// Move every free variable from tag `from` to tag `to`.
pub fn retag(term: &Term, from: Tag, to: Tag) -> Result<Term, RetagError> {
    if let Some(v) = term.free_vars().into_iter().find(|v| v.tag != from) {
        return Err(RetagError::TagMismatch { expected: from, found: v.tag, var: v });
    }
    Ok(rename_free(term, &|v| Some(v.with_tag(to))))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::term_to_sexp(self))
    }
}
