use std::collections::BTreeMap;

use qhl::HyperLtl;

use crate::traces::{BoundedTrace, Oracle};
use crate::OracleError;

/// Three-valued verdict: `None` is unknown.
pub type Tri = Option<bool>;

fn and3(a: Tri, b: Tri) -> Tri {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn or3(a: Tri, b: Tri) -> Tri {
    and3(a.map(|x| !x), b.map(|x| !x)).map(|x| !x)
}

struct Ctx<'a, 'o> {
    oracle: &'a Oracle<'o>,
    traces: &'a BTreeMap<String, &'a BoundedTrace>,
    /// Past this position every known state repeats.
    horizon: usize,
}

impl Ctx<'_, '_> {
    fn at(&self, f: &HyperLtl, p: usize) -> Result<Tri, OracleError> {
        let p = p.min(self.horizon);
        Ok(match f {
            HyperLtl::Const(b) => Some(*b),
            HyperLtl::Pred(pred) => {
                let mut states = Vec::new();
                for a in &pred.args {
                    let t = self.traces.get(a).ok_or_else(|| OracleError::UnboundTrace(a.clone()))?;
                    match t.at(p) {
                        Some(s) => states.push(s),
                        None => return Ok(None),
                    }
                }
                Some(self.oracle.holds_on(&pred.body, &states)?)
            }
            HyperLtl::Not(a) => self.at(a, p)?.map(|x| !x),
            HyperLtl::And(v) => {
                let mut acc = Some(true);
                for x in v {
                    acc = and3(acc, self.at(x, p)?);
                }
                acc
            }
            HyperLtl::Or(v) => {
                let mut acc = Some(false);
                for x in v {
                    acc = or3(acc, self.at(x, p)?);
                }
                acc
            }
            HyperLtl::Implies(a, b) => or3(self.at(a, p)?.map(|x| !x), self.at(b, p)?),
            HyperLtl::Next(a) => self.at(a, p + 1)?,
            HyperLtl::Finally(a) => {
                let mut acc = Some(false);
                for q in p..=self.horizon {
                    acc = or3(acc, self.at(a, q)?);
                }
                acc
            }
            HyperLtl::Globally(a) => {
                let mut acc = Some(true);
                for q in p..=self.horizon {
                    acc = and3(acc, self.at(a, q)?);
                }
                acc
            }
            HyperLtl::Until(a, b) => {
                // OR over q of b(q) ∧ a(p..q)
                let mut acc = Some(false);
                let mut prefix = Some(true);
                for q in p..=self.horizon {
                    acc = or3(acc, and3(prefix, self.at(b, q)?));
                    prefix = and3(prefix, self.at(a, q)?);
                }
                acc
            }
        })
    }
}

/// Bounded three-valued evaluation at position 0. A verdict other than
/// unknown holds for every infinite extension of the prefixes; closed
/// traces extend by repeating their last state.
pub fn eval_bounded(oracle: &Oracle, body: &HyperLtl, traces: &BTreeMap<String, &BoundedTrace>) -> Result<Tri, OracleError> {
    let horizon = traces.values().map(|t| t.len()).max().unwrap_or(0);
    Ctx { oracle, traces, horizon }.at(body, 0)
}
