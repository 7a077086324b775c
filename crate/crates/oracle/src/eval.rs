use term_core::{CmpOp, Quantifier, Sort, Term, Var};
use thiserror::Error;

use crate::value::{ArrayValue, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no value for `{0}`")]
    Unbound(Var),
    #[error("division by zero")]
    DivZero,
    #[error("integer overflow")]
    Overflow,
    #[error("cannot evaluate {0}")]
    Unsupported(String),
    #[error("ill-sorted operand in {0}")]
    Sort(String),
}

/// Variable lookup for evaluation. Bound variables shadow it.
pub trait Env {
    fn get(&self, v: &Var) -> Option<Value>;
}

impl<F: Fn(&Var) -> Option<Value>> Env for F {
    fn get(&self, v: &Var) -> Option<Value> {
        self(v)
    }
}

/// Evaluator with a finite integer range for quantified variables.
pub struct Evaluator<'a> {
    pub env: &'a dyn Env,
    pub quant_range: (i64, i64),
    bound: Vec<(String, Value)>,
}

fn pow2(n: i64) -> Result<i64, EvalError> {
    if !(0..63).contains(&n) {
        return Err(EvalError::Overflow);
    }
    Ok(1i64 << n)
}

fn fact(n: i64) -> Result<i64, EvalError> {
    if n < 0 {
        return Err(EvalError::Unsupported(format!("(fact {})", n)));
    }
    (1..=n).try_fold(1i64, |acc, k| acc.checked_mul(k).ok_or(EvalError::Overflow))
}

/// SMT-LIB integer division: the remainder is always non-negative.
pub fn smt_divmod(a: i64, b: i64) -> Result<(i64, i64), EvalError> {
    if b == 0 {
        return Err(EvalError::DivZero);
    }
    let r = a.rem_euclid(b);
    Ok(((a - r) / b, r))
}

impl<'a> Evaluator<'a> {
    pub fn new(env: &'a dyn Env, quant_range: (i64, i64)) -> Evaluator<'a> {
        Evaluator { env, quant_range, bound: Vec::new() }
    }

    fn int(&mut self, t: &Term, ctx: &Term) -> Result<i64, EvalError> {
        self.eval(t)?.as_int().ok_or_else(|| EvalError::Sort(ctx.to_string()))
    }

    fn boolean(&mut self, t: &Term, ctx: &Term) -> Result<bool, EvalError> {
        self.eval(t)?.as_bool().ok_or_else(|| EvalError::Sort(ctx.to_string()))
    }

    pub fn eval_bool(&mut self, t: &Term) -> Result<bool, EvalError> {
        self.boolean(t, t)
    }

    pub fn eval(&mut self, t: &Term) -> Result<Value, EvalError> {
        let ov = |x: Option<i64>| x.ok_or(EvalError::Overflow);
        Ok(match t {
            Term::Int(n) => Value::Int(i64::try_from(n).map_err(|_| EvalError::Overflow)?),
            Term::Bool(b) => Value::Bool(*b),
            Term::Var(v) => {
                if v.tag == term_core::Tag::Plain {
                    if let Some((_, x)) = self.bound.iter().rev().find(|(n, _)| *n == v.base) {
                        return Ok(x.clone());
                    }
                }
                self.env.get(v).ok_or_else(|| EvalError::Unbound(v.clone()))?
            }
            Term::App(f, args) => match (f.as_str(), args.as_slice()) {
                ("pow2", [a]) => Value::Int(pow2(self.int(a, t)?)?),
                ("fact", [a]) => Value::Int(fact(self.int(a, t)?)?),
                _ => return Err(EvalError::Unsupported(t.to_string())),
            },
            Term::Add(a) => {
                let mut s = 0i64;
                for x in a {
                    s = ov(s.checked_add(self.int(x, t)?))?;
                }
                Value::Int(s)
            }
            Term::Sub(a) => {
                let mut s = self.int(&a[0], t)?;
                for x in &a[1..] {
                    s = ov(s.checked_sub(self.int(x, t)?))?;
                }
                Value::Int(s)
            }
            Term::Mul(a) => {
                let mut s = 1i64;
                for x in a {
                    s = ov(s.checked_mul(self.int(x, t)?))?;
                }
                Value::Int(s)
            }
            Term::Neg(a) => Value::Int(ov(self.int(a, t)?.checked_neg())?),
            Term::Div(a, b) => Value::Int(smt_divmod(self.int(a, t)?, self.int(b, t)?)?.0),
            Term::Mod(a, b) => Value::Int(smt_divmod(self.int(a, t)?, self.int(b, t)?)?.1),
            Term::Cmp(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                let ord = |x: &Value, y: &Value| match (x, y) {
                    (Value::Int(p), Value::Int(q)) => Ok(p.cmp(q)),
                    _ => Err(EvalError::Sort(t.to_string())),
                };
                Value::Bool(match op {
                    CmpOp::Eq => x == y,
                    CmpOp::Ne => x != y,
                    CmpOp::Lt => ord(&x, &y)?.is_lt(),
                    CmpOp::Le => ord(&x, &y)?.is_le(),
                    CmpOp::Gt => ord(&x, &y)?.is_gt(),
                    CmpOp::Ge => ord(&x, &y)?.is_ge(),
                })
            }
            Term::Not(a) => Value::Bool(!self.boolean(a, t)?),
            Term::And(a) => {
                for x in a {
                    if !self.boolean(x, t)? {
                        return Ok(Value::Bool(false));
                    }
                }
                Value::Bool(true)
            }
            Term::Or(a) => {
                for x in a {
                    if self.boolean(x, t)? {
                        return Ok(Value::Bool(true));
                    }
                }
                Value::Bool(false)
            }
            Term::Implies(a, b) => Value::Bool(!self.boolean(a, t)? || self.boolean(b, t)?),
            Term::Ite(c, a, b) => {
                if self.boolean(c, t)? {
                    self.eval(a)?
                } else {
                    self.eval(b)?
                }
            }
            Term::Select(a, i) => {
                let arr = self.eval(a)?;
                let i = self.int(i, t)?;
                arr.as_array().ok_or_else(|| EvalError::Sort(t.to_string()))?.get(i).clone()
            }
            Term::Store(a, i, v) => {
                let arr = self.eval(a)?;
                let i = self.int(i, t)?;
                let v = self.eval(v)?;
                Value::Array(arr.as_array().ok_or_else(|| EvalError::Sort(t.to_string()))?.stored(i, v))
            }
            Term::Quant { q, vars, body, .. } => {
                for (_, s) in vars {
                    if *s != Sort::Int {
                        return Err(EvalError::Unsupported(format!("quantifier over {}", s)));
                    }
                }
                let exists = *q == Quantifier::Exists;
                // ∀x.b is ¬∃x.¬b
                let r = self.witness(vars, 0, body, exists)?;
                Value::Bool(if exists { r } else { !r })
            }
        })
    }

    /// Whether some binding of `vars[k..]` in range makes `body` equal `target`.
    fn witness(&mut self, vars: &[(String, Sort)], k: usize, body: &Term, target: bool) -> Result<bool, EvalError> {
        if k == vars.len() {
            return Ok(self.eval_bool(body)? == target);
        }
        let (lo, hi) = self.quant_range;
        for n in lo..=hi {
            self.bound.push((vars[k].0.clone(), Value::Int(n)));
            let hit = self.witness(vars, k + 1, body, target);
            self.bound.pop();
            if hit? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Default element of an array sort's values.
pub fn default_of(s: &Sort) -> Value {
    match s {
        Sort::Bool => Value::Bool(false),
        Sort::Array(_, e) => Value::Array(ArrayValue::constant(default_of(e))),
        _ => Value::Int(0),
    }
}
