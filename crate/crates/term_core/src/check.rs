use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::sort::Sort;
use crate::term::{CmpOp, Term};
use crate::var::{Tag, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SortError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("rank mismatch in {context}: {detail}")]
    RankMismatch { context: String, detail: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(Var),
    #[error("nonlinear product {0}")]
    NonLinear(String),
    #[error("`{name}` redeclared with a different rank")]
    Redeclared { name: String },
}

/// Uninterpreted sorts and function symbols. Constants are nullary functions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Signature {
    pub sorts: BTreeSet<String>,
    pub functions: BTreeMap<String, (Vec<Sort>, Sort)>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn declare_sort(&mut self, name: impl Into<String>) {
        self.sorts.insert(name.into());
    }

    pub fn declare_fun(&mut self, name: impl Into<String>, args: Vec<Sort>, ret: Sort) -> Result<(), SortError> {
        let name = name.into();
        match self.functions.get(&name) {
            Some((a, r)) if *a != args || *r != ret => Err(SortError::Redeclared { name }),
            _ => {
                self.functions.insert(name, (args, ret));
                Ok(())
            }
        }
    }

    pub fn rank(&self, name: &str) -> Option<&(Vec<Sort>, Sort)> {
        self.functions.get(name)
    }

    fn sort_known(&self, s: &Sort) -> bool {
        match s {
            Sort::Bool | Sort::Int => true,
            Sort::Array(i, e) => self.sort_known(i) && self.sort_known(e),
            Sort::Uninterpreted(n) => self.sorts.contains(n),
        }
    }
}

struct Checker<'a> {
    sig: &'a Signature,
    env: &'a BTreeMap<Var, Sort>,
    bound: Vec<(String, Sort)>,
}

fn mismatch(t: &Term, detail: impl Into<String>) -> SortError {
    let mut context = t.to_string();
    if context.len() > 120 {
        context.truncate(117);
        context.push_str("...");
    }
    SortError::RankMismatch { context, detail: detail.into() }
}

impl Checker<'_> {
    fn lookup(&self, v: &Var) -> Result<Sort, SortError> {
        if v.tag == Tag::Plain {
            if let Some((_, s)) = self.bound.iter().rev().find(|(n, _)| *n == v.base) {
                return Ok(s.clone());
            }
        }
        if let Some(s) = self.env.get(v) {
            return Ok(s.clone());
        }
        if v.tag == Tag::Plain {
            if let Some((args, r)) = self.sig.rank(&v.base) {
                if args.is_empty() {
                    return Ok(r.clone());
                }
            }
        }
        Err(SortError::UnboundVariable(v.clone()))
    }

    fn expect(&mut self, t: &Term, want: &Sort, parent: &Term) -> Result<(), SortError> {
        let got = self.check(t)?;
        if &got == want {
            Ok(())
        } else {
            Err(mismatch(parent, format!("expected {} for {}, found {}", want, t, got)))
        }
    }

    fn all(&mut self, ts: &[Term], want: &Sort, parent: &Term) -> Result<(), SortError> {
        ts.iter().try_for_each(|t| self.expect(t, want, parent))
    }

    fn check(&mut self, t: &Term) -> Result<Sort, SortError> {
        let int = Sort::Int;
        let bool_ = Sort::Bool;
        match t {
            Term::Int(_) => Ok(Sort::Int),
            Term::Bool(_) => Ok(Sort::Bool),
            Term::Var(v) => self.lookup(v),
            Term::App(f, args) => {
                let (params, ret) = self.sig.rank(f).ok_or_else(|| SortError::UnknownSymbol(f.clone()))?.clone();
                if params.len() != args.len() {
                    return Err(mismatch(t, format!("`{}` takes {} argument(s)", f, params.len())));
                }
                for (a, p) in args.iter().zip(&params) {
                    self.expect(a, p, t)?;
                }
                Ok(ret)
            }
            Term::Add(a) | Term::Sub(a) => self.all(a, &int, t).map(|_| Sort::Int),
            Term::Mul(a) => {
                self.all(a, &int, t)?;
                if a.iter().filter(|x| x.as_int().is_none()).count() > 1 {
                    return Err(SortError::NonLinear(t.to_string()));
                }
                Ok(Sort::Int)
            }
            Term::Neg(a) => self.expect(a, &int, t).map(|_| Sort::Int),
            Term::Div(a, b) | Term::Mod(a, b) => {
                self.expect(a, &int, t)?;
                self.expect(b, &int, t)?;
                Ok(Sort::Int)
            }
            Term::Cmp(op, a, b) => {
                let sa = self.check(a)?;
                let sb = self.check(b)?;
                if sa != sb {
                    return Err(mismatch(t, format!("operands have sorts {} and {}", sa, sb)));
                }
                if !matches!(op, CmpOp::Eq | CmpOp::Ne) && sa != Sort::Int {
                    return Err(mismatch(t, format!("ordering over {}", sa)));
                }
                Ok(Sort::Bool)
            }
            Term::Not(a) => self.expect(a, &bool_, t).map(|_| Sort::Bool),
            Term::And(a) | Term::Or(a) => self.all(a, &bool_, t).map(|_| Sort::Bool),
            Term::Implies(a, b) => {
                self.expect(a, &bool_, t)?;
                self.expect(b, &bool_, t)?;
                Ok(Sort::Bool)
            }
            Term::Ite(c, a, b) => {
                self.expect(c, &bool_, t)?;
                let sa = self.check(a)?;
                self.expect(b, &sa, t)?;
                Ok(sa)
            }
            Term::Select(a, i) => match self.check(a)? {
                Sort::Array(is, es) => {
                    self.expect(i, &is, t)?;
                    Ok(*es)
                }
                s => Err(mismatch(t, format!("select from non-array sort {}", s))),
            },
            Term::Store(a, i, e) => match self.check(a)? {
                Sort::Array(is, es) => {
                    self.expect(i, &is, t)?;
                    self.expect(e, &es, t)?;
                    Ok(Sort::Array(is, es))
                }
                s => Err(mismatch(t, format!("store into non-array sort {}", s))),
            },
            Term::Quant { vars, body, patterns, .. } => {
                for (i, (n, s)) in vars.iter().enumerate() {
                    if !self.sig.sort_known(s) {
                        return Err(SortError::UnknownSymbol(s.to_string()));
                    }
                    if vars[..i].iter().any(|(m, _)| m == n) {
                        return Err(mismatch(t, format!("`{}` bound twice", n)));
                    }
                }
                let depth = self.bound.len();
                self.bound.extend(vars.iter().cloned());
                let r = self
                    .expect(body, &bool_, t)
                    .and_then(|_| patterns.iter().flatten().try_for_each(|p| self.check(p).map(|_| ())));
                self.bound.truncate(depth);
                r.map(|_| Sort::Bool)
            }
        }
    }
}

/// Sort of `term` under `sig` and `env`, or the first ill-sorted node.
pub fn check_sorts(term: &Term, sig: &Signature, env: &BTreeMap<Var, Sort>) -> Result<Sort, SortError> {
    Checker { sig, env, bound: Vec::new() }.check(term)
}
