//! Quantitative HyperLTL: formula trees, the single-alternation counting
//! template, and its syntactic well-definedness check.

mod ast;
mod parse;
mod wd;

pub use ast::{predicate_to_formula, Comparator, HyperLtl, QhlError, QhpProperty, StatePredicate};
pub use parse::{parse_hyperltl, parse_property, parse_property_str};
pub use wd::{check_well_defined, WellDefined};
