use std::collections::BTreeMap;

use term_core::{parse_sexps, parse_term, Sexp, Sort, Term, Var};
use transition_system::TransitionSystem;

use crate::eval::{default_of, Evaluator};
use crate::value::{ArrayValue, Value};
use crate::OracleError;

/// Domain description; bounds are terms over the parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainExpr {
    Bool,
    /// Inclusive integer range.
    Int(Term, Term),
    Values(Vec<Term>),
    /// Arrays whose entries outside `lo..=hi` hold the default.
    Array(Term, Term, Box<DomainExpr>),
}

/// Unevaluated instance file contents.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct InstanceSpec {
    pub params: BTreeMap<String, i64>,
    pub domains: Vec<(String, DomainExpr)>,
    pub depth: Option<Term>,
    pub quant_range: Option<(Term, Term)>,
    pub cap: Option<u64>,
    /// Sample this many pivot traces instead of enumerating all of them.
    pub pivots: Option<u64>,
}

/// A system with finite domains and a fixed parameter binding.
#[derive(Clone, Debug)]
pub struct FiniteInstance {
    pub system: TransitionSystem,
    pub params: BTreeMap<String, i64>,
    /// Explicit value lists, for state variables and any extra counted variables.
    pub domains: BTreeMap<String, Vec<Value>>,
    pub depth: usize,
    pub quant_range: (i64, i64),
    pub cap: u64,
    pub pivots: Option<u64>,
}

pub const DEFAULT_CAP: u64 = 1_000_000;

fn bad(msg: impl Into<String>) -> OracleError {
    OracleError::Instance(msg.into())
}

fn term(s: &Sexp) -> Result<Term, OracleError> {
    parse_term(s).map_err(|e| bad(e.to_string()))
}

fn parse_domain(s: &Sexp) -> Result<DomainExpr, OracleError> {
    let v = s.as_list().ok_or_else(|| bad(format!("bad domain {}", s)))?;
    match (s.head(), &v[1..]) {
        (Some("bool"), []) => Ok(DomainExpr::Bool),
        (Some("int"), [lo, hi]) => Ok(DomainExpr::Int(term(lo)?, term(hi)?)),
        (Some("values"), vals) => Ok(DomainExpr::Values(vals.iter().map(term).collect::<Result<_, _>>()?)),
        (Some("array"), [lo, hi, e]) => Ok(DomainExpr::Array(term(lo)?, term(hi)?, Box::new(parse_domain(e)?))),
        _ => Err(bad(format!("bad domain {}", s))),
    }
}

/// `(instance (params (R 2)) (domains (x (int 0 5)) ..) (depth 4)? (quant-range lo hi)? (cap N)? (pivots N)?)`
pub fn parse_instance(s: &Sexp) -> Result<InstanceSpec, OracleError> {
    let items = s.as_list().filter(|_| s.head() == Some("instance")).ok_or_else(|| bad("expected (instance ...)"))?;
    let mut spec = InstanceSpec::default();
    for it in &items[1..] {
        let args = it.as_list().map(|v| &v[1..]).ok_or_else(|| bad(format!("unexpected {}", it)))?;
        match (it.head(), args) {
            (Some("params"), ps) => {
                for p in ps {
                    match p.as_list() {
                        Some([n, v]) => {
                            let n = n.as_atom().ok_or_else(|| bad("parameter name"))?;
                            let v = match term(v)? {
                                Term::Int(k) => i64::try_from(&k).map_err(|_| bad("parameter out of range"))?,
                                _ => return Err(bad("parameter values must be integer literals")),
                            };
                            spec.params.insert(n.to_string(), v);
                        }
                        _ => return Err(bad(format!("bad parameter {}", p))),
                    }
                }
            }
            (Some("domains"), ds) => {
                for d in ds {
                    match d.as_list() {
                        Some([n, e]) => {
                            let n = n.as_atom().ok_or_else(|| bad("domain variable"))?;
                            spec.domains.push((n.to_string(), parse_domain(e)?));
                        }
                        _ => return Err(bad(format!("bad domain entry {}", d))),
                    }
                }
            }
            (Some("depth"), [d]) => spec.depth = Some(term(d)?),
            (Some("quant-range"), [lo, hi]) => spec.quant_range = Some((term(lo)?, term(hi)?)),
            (Some("cap"), [c]) => {
                spec.cap = Some(c.as_atom().and_then(|a| a.parse().ok()).ok_or_else(|| bad("cap must be a number"))?)
            }
            (Some("pivots"), [c]) => {
                spec.pivots = Some(c.as_atom().and_then(|a| a.parse().ok()).ok_or_else(|| bad("pivots must be a number"))?)
            }
            _ => return Err(bad(format!("unexpected {}", it))),
        }
    }
    Ok(spec)
}

pub fn parse_instance_str(src: &str) -> Result<InstanceSpec, OracleError> {
    let v = parse_sexps(src).map_err(|e| bad(e.to_string()))?;
    match v.as_slice() {
        [s] => parse_instance(s),
        _ => Err(bad("expected exactly one (instance ...) form")),
    }
}

fn param_env(params: &BTreeMap<String, i64>) -> impl Fn(&Var) -> Option<Value> + '_ {
    move |v: &Var| params.get(&v.base).map(|n| Value::Int(*n))
}

fn eval_int(t: &Term, params: &BTreeMap<String, i64>) -> Result<i64, OracleError> {
    let env = param_env(params);
    let mut ev = Evaluator::new(&env, (0, 0));
    ev.eval(t)?.as_int().ok_or_else(|| bad(format!("{} is not an integer", t)))
}

fn expand(d: &DomainExpr, sort: Option<&Sort>, params: &BTreeMap<String, i64>, cap: u64) -> Result<Vec<Value>, OracleError> {
    Ok(match d {
        DomainExpr::Bool => vec![Value::Bool(false), Value::Bool(true)],
        DomainExpr::Int(lo, hi) => (eval_int(lo, params)?..=eval_int(hi, params)?).map(Value::Int).collect(),
        DomainExpr::Values(vs) => {
            let env = param_env(params);
            let mut ev = Evaluator::new(&env, (0, 0));
            vs.iter().map(|v| ev.eval(v)).collect::<Result<_, _>>()?
        }
        DomainExpr::Array(lo, hi, e) => {
            let (lo, hi) = (eval_int(lo, params)?, eval_int(hi, params)?);
            let elem_sort = match sort {
                Some(Sort::Array(_, es)) => Some(es.as_ref()),
                _ => None,
            };
            let elems = expand(e, elem_sort, params, cap)?;
            let default = elem_sort.map(default_of).unwrap_or(match elems.first() {
                Some(Value::Bool(_)) => Value::Bool(false),
                _ => Value::Int(0),
            });
            let mut out = vec![ArrayValue::constant(default)];
            for i in lo..=hi {
                let mut next = Vec::with_capacity(out.len() * elems.len());
                for a in &out {
                    for v in &elems {
                        next.push(a.stored(i, v.clone()));
                    }
                }
                if next.len() as u64 > cap {
                    return Err(OracleError::CapExceeded(cap));
                }
                out = next;
            }
            out.into_iter().map(Value::Array).collect()
        }
    })
}

impl InstanceSpec {
    /// Fix parameters (file values overridden by `overrides`) and expand domains.
    pub fn instantiate(&self, system: &TransitionSystem, overrides: &[(&str, i64)]) -> Result<FiniteInstance, OracleError> {
        let mut params = self.params.clone();
        for (k, v) in overrides {
            params.insert(k.to_string(), *v);
        }
        for p in &system.params {
            if !params.contains_key(p) {
                return Err(bad(format!("parameter `{}` has no value", p)));
            }
        }
        let cap = self.cap.unwrap_or(DEFAULT_CAP);
        let mut domains = BTreeMap::new();
        for (n, d) in &self.domains {
            domains.insert(n.clone(), expand(d, system.var_sort(n), &params, cap)?);
        }
        for (n, v) in &params {
            if system.var_sort(n).is_some() {
                domains.insert(n.clone(), vec![Value::Int(*v)]);
            }
        }
        for (n, _) in &system.vars {
            if !domains.contains_key(n) {
                return Err(bad(format!("state variable `{}` has no domain", n)));
            }
        }
        let depth = match &self.depth {
            Some(t) => eval_int(t, &params)?.max(1) as usize,
            None => 1,
        };
        let quant_range = match &self.quant_range {
            Some((lo, hi)) => (eval_int(lo, &params)?, eval_int(hi, &params)?),
            None => {
                let mut ints: Vec<i64> = params.values().copied().collect();
                for vs in domains.values() {
                    vs.iter().for_each(|v| v.ints(&mut ints));
                }
                let lo = ints.iter().copied().min().unwrap_or(0);
                let hi = ints.iter().copied().max().unwrap_or(0);
                (lo - 1, hi + 1)
            }
        };
        Ok(FiniteInstance { system: system.clone(), params, domains, depth, quant_range, cap, pivots: self.pivots })
    }
}
