//! Symbolic transition systems, self-composition and 1-induction.

mod check;
mod parse;
mod system;

pub use check::{
    check_inductive, check_totality, check_valid, check_valid_with, InductiveObligation, InductiveResult, Totality, Validity,
};
pub use parse::{parse_system, parse_system_str};
pub use system::{prime_state, ComposedSystem, SystemError, TransitionSystem};
