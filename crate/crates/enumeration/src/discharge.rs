use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use smt_backend::{Backend, Model};
use transition_system::{check_valid_with, Validity};

use crate::vcs::{BundleKind, VcBundle};

#[derive(Clone, Debug, PartialEq)]
pub enum ObligationVerdict {
    Proved,
    Failed(Option<Model>),
    Unknown(String),
}

impl ObligationVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            ObligationVerdict::Proved => "proved",
            ObligationVerdict::Failed(_) => "failed",
            ObligationVerdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObligationResult {
    pub label: String,
    pub verdict: ObligationVerdict,
    pub time_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DischargeReport {
    pub kind: BundleKind,
    pub results: Vec<ObligationResult>,
}

impl DischargeReport {
    /// All obligations proved.
    pub fn established(&self) -> bool {
        self.results.iter().all(|r| r.verdict == ObligationVerdict::Proved)
    }

    pub fn first_failure(&self) -> Option<&ObligationResult> {
        self.results.iter().find(|r| r.verdict != ObligationVerdict::Proved)
    }

    pub fn get(&self, label: &str) -> Option<&ObligationResult> {
        self.results.iter().find(|r| r.label == label)
    }
}

#[derive(Clone, Debug)]
pub struct DischargeOptions {
    /// Prepended to every query label, e.g. the project name.
    pub prefix: String,
    pub threads: usize,
}

impl Default for DischargeOptions {
    fn default() -> Self {
        DischargeOptions { prefix: String::new(), threads: 4 }
    }
}

/// Send every obligation to the solver, `threads` at a time. Results come
/// back in bundle order regardless of completion order.
pub fn discharge(bundle: &VcBundle, backend: &dyn Backend, opts: &DischargeOptions) -> DischargeReport {
    let n = bundle.obligations.len();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ObligationResult>>> = Mutex::new(vec![None; n]);
    std::thread::scope(|s| {
        for _ in 0..opts.threads.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(ob) = bundle.obligations.get(i) else { break };
                let label = if opts.prefix.is_empty() {
                    format!("{}/{}", bundle.kind.name(), ob.label)
                } else {
                    format!("{}/{}/{}", opts.prefix, bundle.kind.name(), ob.label)
                };
                let (v, ms) = check_valid_with(&label, &ob.hyps, &ob.goal, &ob.env, &bundle.sig, &bundle.options, backend);
                let verdict = match v {
                    Validity::Valid => ObligationVerdict::Proved,
                    Validity::Invalid(m) => ObligationVerdict::Failed(m),
                    Validity::Unknown(r) => ObligationVerdict::Unknown(r),
                };
                slots.lock().unwrap()[i] = Some(ObligationResult { label: ob.label.clone(), verdict, time_ms: ms });
            });
        }
    });
    let results = slots.into_inner().unwrap().into_iter().map(|r| r.expect("every obligation ran")).collect();
    DischargeReport { kind: bundle.kind, results }
}
