use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use term_core::{Tag, Term, Var};

use crate::eval::{EvalError, Evaluator};
use crate::instance::FiniteInstance;
use crate::value::Value;
use crate::OracleError;

/// Values of the state variables, in declaration order.
pub type State = Vec<Value>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundedTrace {
    pub states: Vec<State>,
    /// The last state's only successor is itself, so the prefix determines
    /// the whole infinite trace.
    pub closed: bool,
}

impl BoundedTrace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// State at position `p`, if known.
    pub fn at(&self, p: usize) -> Option<&State> {
        match self.states.get(p) {
            Some(s) => Some(s),
            None if self.closed => self.states.last(),
            None => None,
        }
    }
}

/// Explicit-state view of a finite instance.
pub struct Oracle<'a> {
    pub inst: &'a FiniteInstance,
    index: BTreeMap<String, usize>,
    functional: Vec<Option<Term>>,
}

impl<'a> Oracle<'a> {
    pub fn new(inst: &'a FiniteInstance) -> Oracle<'a> {
        let index = inst.system.vars.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
        let f = inst.system.functional_updates();
        let functional = inst.system.vars.iter().map(|(n, _)| f.get(n).cloned()).collect();
        Oracle { inst, index, functional }
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn value<'s>(&self, s: &'s State, name: &str) -> Option<&'s Value> {
        self.var_index(name).map(|i| &s[i])
    }

    fn param(&self, v: &Var) -> Option<Value> {
        (v.tag == Tag::Plain).then(|| self.inst.params.get(&v.base).map(|n| Value::Int(*n))).flatten()
    }

    /// Evaluate a formula over a current state and, optionally, a next state.
    pub fn holds(&self, t: &Term, cur: &State, next: Option<&State>) -> Result<bool, EvalError> {
        let env = |v: &Var| match v.tag {
            Tag::Plain => self.var_index(&v.base).map(|i| cur[i].clone()).or_else(|| self.param(v)),
            Tag::Primed => next.and_then(|n| self.var_index(&v.base).map(|i| n[i].clone())),
            _ => None,
        };
        Evaluator::new(&env, self.inst.quant_range).eval_bool(t)
    }

    /// Evaluate a term whose `@k` variables read `states[k-1]`.
    pub fn holds_on(&self, t: &Term, states: &[&State]) -> Result<bool, EvalError> {
        let env = |v: &Var| match v.tag {
            Tag::Indexed(k) => {
                states.get((k as usize).wrapping_sub(1)).and_then(|s| self.var_index(&v.base).map(|i| s[i].clone()))
            }
            Tag::Plain => self.param(v),
            _ => None,
        };
        Evaluator::new(&env, self.inst.quant_range).eval_bool(t)
    }

    fn domain(&self, i: usize) -> &[Value] {
        &self.inst.domains[&self.inst.system.vars[i].0]
    }

    /// Cartesian product over the given positions, filling `base`.
    fn product(
        &self,
        base: &State,
        free: &[usize],
        out: &mut dyn FnMut(&State) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        let total: u128 = free.iter().map(|&i| self.domain(i).len() as u128).product();
        if total > self.inst.cap as u128 {
            return Err(OracleError::CapExceeded(self.inst.cap));
        }
        let mut s = base.clone();
        let mut idx = vec![0usize; free.len()];
        if free.iter().any(|&i| self.domain(i).is_empty()) {
            return Ok(());
        }
        loop {
            for (k, &i) in free.iter().enumerate() {
                s[i] = self.domain(i)[idx[k]].clone();
            }
            out(&s)?;
            let mut k = free.len();
            loop {
                if k == 0 {
                    return Ok(());
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.domain(free[k]).len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    pub fn initial_states(&self) -> Result<Vec<State>, OracleError> {
        let n = self.inst.system.vars.len();
        let base: State = vec![Value::Bool(false); n];
        let all: Vec<usize> = (0..n).collect();
        let mut out = Vec::new();
        let init = &self.inst.system.init;
        self.product(&base, &all, &mut |s| {
            if self.holds(init, s, None)? {
                out.push(s.clone());
            }
            Ok(())
        })?;
        Ok(out)
    }

    /// Successors: functional updates are computed, the remaining
    /// variables range over their domains, and Tx filters the result.
    pub fn successors(&self, s: &State) -> Result<Vec<State>, OracleError> {
        let mut base = s.clone();
        let mut free = Vec::new();
        for (i, f) in self.functional.iter().enumerate() {
            match f {
                Some(t) => {
                    let env = |v: &Var| match v.tag {
                        Tag::Plain => self.var_index(&v.base).map(|j| s[j].clone()).or_else(|| self.param(v)),
                        _ => None,
                    };
                    base[i] = Evaluator::new(&env, self.inst.quant_range).eval(t)?;
                }
                None => free.push(i),
            }
        }
        let mut out = Vec::new();
        let tx = &self.inst.system.tx;
        self.product(&base, &free, &mut |n| {
            if self.holds(tx, s, Some(n))? {
                out.push(n.clone());
            }
            Ok(())
        })?;
        Ok(out)
    }

    pub fn is_closed(&self, s: &State) -> Result<bool, OracleError> {
        Ok(self.successors(s)? == vec![s.clone()])
    }

    /// Every depth-`d` prefix, in a canonical order.
    pub fn enumerate_traces(&self) -> Result<Vec<BoundedTrace>, OracleError> {
        let mut out = Vec::new();
        for s in self.initial_states()? {
            self.extend(vec![s], &mut |_| Ok(true), &mut out)?;
        }
        out.sort();
        Ok(out)
    }

    /// Up to `n` distinct depth-`d` prefixes drawn by random walks from a
    /// seeded generator, in canonical order.
    pub fn sample_traces(&self, n: u64, seed: u64) -> Result<Vec<BoundedTrace>, OracleError> {
        let inits = self.initial_states()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = BTreeSet::new();
        if inits.is_empty() {
            return Ok(vec![]);
        }
        // Walks can repeat; a few extra attempts per sample keeps small
        // instances from coming up short.
        for _ in 0..n.saturating_mul(4) {
            if out.len() as u64 >= n {
                break;
            }
            let mut states = vec![inits[rng.gen_range(0..inits.len())].clone()];
            while states.len() < self.inst.depth {
                let succ = self.successors(states.last().unwrap())?;
                if succ.is_empty() {
                    break;
                }
                states.push(succ[rng.gen_range(0..succ.len())].clone());
            }
            if states.len() < self.inst.depth {
                continue;
            }
            let closed = self.is_closed(states.last().unwrap())?;
            out.insert(BoundedTrace { states, closed });
        }
        Ok(out.into_iter().collect())
    }

    /// Depth-first extension of `prefix`; `keep` prunes partial prefixes.
    pub fn extend(
        &self,
        prefix: Vec<State>,
        keep: &mut dyn FnMut(&[State]) -> Result<bool, OracleError>,
        out: &mut Vec<BoundedTrace>,
    ) -> Result<(), OracleError> {
        if !keep(&prefix)? {
            return Ok(());
        }
        if prefix.len() >= self.inst.depth {
            let closed = self.is_closed(prefix.last().unwrap())?;
            out.push(BoundedTrace { states: prefix, closed });
            if out.len() as u64 > self.inst.cap {
                return Err(OracleError::CapExceeded(self.inst.cap));
            }
            return Ok(());
        }
        for n in self.successors(prefix.last().unwrap())? {
            let mut p = prefix.clone();
            p.push(n);
            self.extend(p, keep, out)?;
        }
        Ok(())
    }
}
