use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use oracle::{brute_count, count_equivalence_classes, parse_instance_str, Evaluator, Oracle, Value};
use serde::{Deserialize, Serialize};
use term_core::Var;

use crate::project::{load_property, load_system, load_witness, project_name, ENUMERATION_FILE, INSTANCE_FILE};
use crate::ConfigError;

pub const ORACLE_SCHEMA: &str = "oracle/v1";
/// Seed for pivot sampling; fixed so runs are repeatable.
pub const PIVOT_SEED: u64 = 0x51ab;

#[derive(Clone, Debug, Default)]
pub struct OracleOptions {
    pub params: Vec<(String, i64)>,
    /// Overrides the instance file's `pivots`.
    pub pivots: Option<u64>,
}

/// Explicit-state check of one instance: class counts per pivot against
/// N(Z), and the brute-force size of Valid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub schema: String,
    pub project: String,
    pub params: BTreeMap<String, i64>,
    pub depth: usize,
    pub cmp: String,
    pub bound: i64,
    /// `true` when every trace of the instance was a pivot.
    pub exhaustive: bool,
    pub pivots: u64,
    pub undecided_pivots: u64,
    pub min_classes: Option<u64>,
    pub max_classes: Option<u64>,
    pub violations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid_count: Option<u64>,
    pub holds: bool,
    pub time_ms: u64,
}

fn oerr(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::Resolve(format!("oracle: {}", e))
}

pub fn run_oracle(dir: &Path, opts: &OracleOptions) -> Result<OracleSummary, ConfigError> {
    let t0 = Instant::now();
    let system = load_system(dir)?;
    let property = load_property(dir)?;
    let src = std::fs::read_to_string(dir.join(INSTANCE_FILE))
        .map_err(|e| ConfigError::Io(format!("{}: {}", dir.join(INSTANCE_FILE).display(), e)))?;
    let spec = parse_instance_str(&src).map_err(|e| ConfigError::Parse { file: INSTANCE_FILE.into(), detail: e.to_string() })?;
    let overrides: Vec<(&str, i64)> = opts.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let inst = spec.instantiate(&system, &overrides).map_err(oerr)?;

    let params = inst.params.clone();
    let penv = |v: &Var| params.get(&v.base).map(|n| Value::Int(*n));
    let bound = Evaluator::new(&penv, inst.quant_range)
        .eval(&property.bound)
        .map_err(oerr)?
        .as_int()
        .ok_or_else(|| oerr("the bound is not an integer"))?;

    let o = Oracle::new(&inst);
    let sample = opts.pivots.or(inst.pivots);
    let pivots = match sample {
        Some(0) => vec![],
        Some(n) => o.sample_traces(n, PIVOT_SEED).map_err(oerr)?,
        None => o.enumerate_traces().map_err(oerr)?,
    };
    let mut s = OracleSummary {
        schema: ORACLE_SCHEMA.into(),
        project: project_name(dir),
        params: inst.params.clone(),
        depth: inst.depth,
        cmp: property.cmp.keyword().into(),
        bound,
        exhaustive: sample.is_none(),
        pivots: pivots.len() as u64,
        undecided_pivots: 0,
        min_classes: None,
        max_classes: None,
        violations: 0,
        valid_count: None,
        holds: true,
        time_ms: 0,
    };
    for pv in &pivots {
        match count_equivalence_classes(&o, &property, pv).map_err(oerr)? {
            Some(c) => {
                s.min_classes = Some(s.min_classes.map_or(c, |m| m.min(c)));
                s.max_classes = Some(s.max_classes.map_or(c, |m| m.max(c)));
                if !property.cmp.holds(c as i128, bound as i128) {
                    s.violations += 1;
                }
            }
            None => s.undecided_pivots += 1,
        }
    }

    if dir.join(ENUMERATION_FILE).exists() {
        let w = load_witness(dir)?;
        let counted: Option<Vec<(String, Vec<Value>)>> =
            w.enum_vars.iter().map(|(n, _)| inst.domains.get(n).map(|d| (n.clone(), d.clone()))).collect();
        if let Some(counted) = counted {
            let fixed: BTreeMap<String, Value> = inst.params.iter().map(|(k, v)| (k.clone(), Value::Int(*v))).collect();
            s.valid_count = Some(brute_count(&w.valid, &counted, &fixed, inst.quant_range, inst.cap).map_err(oerr)?);
        }
    }
    s.holds = s.violations == 0 && s.undecided_pivots == 0;
    s.time_ms = t0.elapsed().as_millis() as u64;
    Ok(s)
}
