use std::collections::BTreeSet;

use smt_backend::Backend;

use crate::kernel::{CountFact, Kernel, KernelOptions, PremiseResult};
use crate::script::ProofScript;
use crate::CountError;

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub label: String,
    pub facts: Vec<CountFact>,
}

#[derive(Clone, Debug)]
pub enum ScriptVerdict {
    Accepted,
    /// `at` is a step label, `goal` or `declarations`.
    Rejected {
        at: String,
        reason: CountError,
    },
}

#[derive(Clone, Debug)]
pub struct ScriptReport {
    pub steps: Vec<StepOutcome>,
    pub premises: Vec<PremiseResult>,
    pub verdict: ScriptVerdict,
}

impl ScriptReport {
    pub fn accepted(&self) -> bool {
        matches!(self.verdict, ScriptVerdict::Accepted)
    }

    pub fn rejected_at(&self) -> Option<&str> {
        match &self.verdict {
            ScriptVerdict::Rejected { at, .. } => Some(at),
            ScriptVerdict::Accepted => None,
        }
    }
}

/// Run every step in order, then the goal. Stops at the first rejection.
pub fn check_script(script: &ProofScript, backend: &dyn Backend, opts: &KernelOptions) -> ScriptReport {
    let mut report = ScriptReport { steps: vec![], premises: vec![], verdict: ScriptVerdict::Accepted };
    let reject = |at: &str, reason| ScriptVerdict::Rejected { at: at.to_string(), reason };
    let mut k = match Kernel::new(&script.decls, &script.recs, backend, opts.clone()) {
        Ok(k) => k,
        Err(e) => {
            report.verdict = reject("declarations", e);
            return report;
        }
    };
    let mut seen = BTreeSet::new();
    for s in &script.steps {
        if !seen.insert(s.label.as_str()) {
            report.verdict = reject(&s.label, CountError::DuplicateStep(s.label.clone()));
            return report;
        }
        let mut out = StepOutcome { label: s.label.clone(), facts: vec![] };
        for r in &s.rules {
            match k.apply(&s.label, r) {
                Ok(f) => out.facts.push(f),
                Err(e) => {
                    report.steps.push(out);
                    report.premises = std::mem::take(&mut k.premises);
                    report.verdict = reject(&s.label, e);
                    return report;
                }
            }
        }
        report.steps.push(out);
    }
    k.set_step("");
    let res = match &script.goal {
        None => Err(CountError::NoGoal),
        Some(g) => k.goal(&g.claim, g.guard.as_ref()),
    };
    report.premises = std::mem::take(&mut k.premises);
    if let Err(e) = res {
        report.verdict = reject("goal", e);
    }
    report
}
