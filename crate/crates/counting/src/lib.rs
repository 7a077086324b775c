//! Proof kernel for model counts. Counts become uninterpreted integer
//! functions of their parameters; every admitted rule conclusion is an axiom
//! about them, and rule premises are ordinary solver queries.

mod check;
mod kernel;
mod script;

pub use check::{check_script, ScriptReport, ScriptVerdict, StepOutcome};
pub use kernel::{CountFact, Expect, Kernel, KernelOptions, PremiseResult, COUNT_PREFIX};
pub use script::{
    parse_script, parse_script_str, CountApp, CountDecl, ExplicitModel, Goal, ModelValue, ProofScript, RecFun, Rule, RuleApp,
    Step, Witness,
};

use smt_backend::Model;
use thiserror::Error;

#[derive(Clone, Debug, Error)]
pub enum CountError {
    #[error("proof syntax: {0}")]
    Syntax(String),
    #[error("unknown count or function `{0}`")]
    UnknownCount(String),
    #[error("`{name}` takes {expected} arguments, found {found}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("sort error in {context}: {detail}")]
    Sort { context: String, detail: String },
    #[error("range needs one integer variable bounded as (and (<= a x) (< x b)): {0}")]
    NotRange(String),
    #[error("const-lb needs a formula free of parameters: {0}")]
    NotGround(String),
    #[error("counted variables overlap: {0:?}")]
    VarsOverlap(Vec<String>),
    #[error("counted variables do not line up: {0}")]
    VarsMismatch(String),
    #[error("witness: {0}")]
    Witness(String),
    #[error("no facts from step `{0}`")]
    UnknownStep(String),
    #[error("step label `{0}` used twice")]
    DuplicateStep(String),
    #[error("{query}: premise fails")]
    NotValid { query: String, model: Option<Model> },
    #[error("{query}: no such models")]
    NotSat { query: String },
    #[error("{query}: solver gave no answer ({reason})")]
    QueryUnknown { query: String, reason: String },
    #[error("{query}: closed form disagrees at the base index")]
    BaseMismatch { query: String, model: Option<Model> },
    #[error("{query}: closed form does not survive the step")]
    StepMismatch { query: String, model: Option<Model> },
    #[error("{query}: goal does not follow from the admitted facts")]
    GoalNotEntailed { query: String, model: Option<Model> },
    #[error("script has no goal")]
    NoGoal,
}
