//! Explicit-state ground truth for small instances: bounded trace
//! enumeration, three-valued HyperLTL evaluation, equivalence-class counting
//! and brute-force model counting.

mod classes;
mod count;
mod eval;
mod instance;
mod ltl;
mod traces;
mod value;

use thiserror::Error;

pub use classes::{count_equivalence_classes, is_globally_pred, related_traces};
pub use count::brute_count;
pub use eval::{smt_divmod, Env, EvalError, Evaluator};
pub use instance::{parse_instance, parse_instance_str, DomainExpr, FiniteInstance, InstanceSpec, DEFAULT_CAP};
pub use ltl::{eval_bounded, Tri};
pub use traces::{BoundedTrace, Oracle, State};
pub use value::{ArrayValue, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration cap of {0} exceeded")]
    CapExceeded(u64),
    #[error("instance: {0}")]
    Instance(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("trace variable `{0}` is not bound")]
    UnboundTrace(String),
    #[error("{0}")]
    Unsupported(String),
}
