use std::collections::BTreeMap;

use term_core::{Tag, Term, Var};

use crate::eval::Evaluator;
use crate::value::Value;
use crate::OracleError;

/// Exact model count of `formula` over the product of the counted
/// variables' domains, with every other variable taken from `fixed`.
pub fn brute_count(
    formula: &Term,
    counted: &[(String, Vec<Value>)],
    fixed: &BTreeMap<String, Value>,
    quant_range: (i64, i64),
    cap: u64,
) -> Result<u64, OracleError> {
    let total: u128 = counted.iter().map(|(_, d)| d.len() as u128).product();
    if total > cap as u128 {
        return Err(OracleError::CapExceeded(cap));
    }
    if counted.iter().any(|(_, d)| d.is_empty()) {
        return Ok(0);
    }
    let mut idx = vec![0usize; counted.len()];
    let mut n = 0u64;
    loop {
        let env = |v: &Var| {
            if v.tag != Tag::Plain {
                return None;
            }
            counted
                .iter()
                .zip(&idx)
                .find(|((name, _), _)| *name == v.base)
                .map(|((_, d), &i)| d[i].clone())
                .or_else(|| fixed.get(&v.base).cloned())
        };
        if Evaluator::new(&env, quant_range).eval_bool(formula)? {
            n += 1;
        }
        let mut k = counted.len();
        loop {
            if k == 0 {
                return Ok(n);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < counted[k].1.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
