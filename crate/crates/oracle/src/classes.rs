use std::collections::BTreeMap;

use qhl::{HyperLtl, QhpProperty};

use crate::ltl::eval_bounded;
use crate::traces::{BoundedTrace, Oracle};
use crate::OracleError;

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Traces `τ₁` with `ψ(pivot, τ₁)` true, or `None` if some verdict is unknown.
/// A `G(pred)` body prunes the search state by state.
pub fn related_traces(oracle: &Oracle, p: &QhpProperty, pivot: &BoundedTrace) -> Result<Option<Vec<BoundedTrace>>, OracleError> {
    let mut candidates = Vec::new();
    match p.psi() {
        Some(pred) => {
            let slot = |t: &String| if *t == p.forall { 0 } else { 1 };
            let order: Vec<usize> = pred.args.iter().map(slot).collect();
            let mut keep = |prefix: &[Vec<crate::value::Value>]| -> Result<bool, OracleError> {
                let k = prefix.len() - 1;
                let Some(s0) = pivot.at(k) else { return Ok(true) };
                let pair = [s0, &prefix[k]];
                let states: Vec<_> = order.iter().map(|&i| pair[i]).collect();
                // An error here (e.g. an unevaluable atom) keeps the branch;
                // the full evaluation below decides.
                Ok(oracle.holds_on(&pred.body, &states).unwrap_or(true))
            };
            for s in oracle.initial_states()? {
                oracle.extend(vec![s], &mut keep, &mut candidates)?;
            }
        }
        None => candidates = oracle.enumerate_traces()?,
    }
    let mut out = Vec::new();
    for c in candidates {
        let env = BTreeMap::from([(p.forall.clone(), pivot), (p.count.clone(), &c)]);
        match eval_bounded(oracle, &p.body, &env)? {
            Some(true) => out.push(c),
            Some(false) => {}
            None => return Ok(None),
        }
    }
    out.sort();
    Ok(Some(out))
}

/// Number of `¬Δ` classes among the traces related to `pivot`.
pub fn count_equivalence_classes(oracle: &Oracle, p: &QhpProperty, pivot: &BoundedTrace) -> Result<Option<u64>, OracleError> {
    let Some(rel) = related_traces(oracle, p, pivot)? else { return Ok(None) };
    let vars = p.diff.trace_vars();
    let (a, b) = match vars.as_slice() {
        [a, b] => (a.clone(), b.clone()),
        _ => return Err(OracleError::Unsupported("difference formula must use two trace variables".into())),
    };
    let mut parent: Vec<usize> = (0..rel.len()).collect();
    for i in 0..rel.len() {
        for j in i + 1..rel.len() {
            if find(&mut parent, i) == find(&mut parent, j) {
                continue;
            }
            let env = BTreeMap::from([(a.clone(), &rel[i]), (b.clone(), &rel[j])]);
            match eval_bounded(oracle, &p.diff, &env)? {
                Some(true) => {}
                Some(false) => {
                    let (x, y) = (find(&mut parent, i), find(&mut parent, j));
                    parent[x] = y;
                }
                None => return Ok(None),
            }
        }
    }
    let roots = (0..rel.len()).filter(|&i| find(&mut parent, i) == i).count();
    Ok(Some(roots as u64))
}

/// Whether a body can be pruned state by state.
pub fn is_globally_pred(f: &HyperLtl) -> bool {
    matches!(f, HyperLtl::Globally(a) if matches!(a.as_ref(), HyperLtl::Pred(_)))
}
