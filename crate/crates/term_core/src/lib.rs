//! Sorted first-order terms over booleans, integers, arrays and
//! uninterpreted functions, plus the S-expression surface syntax shared by
//! every file format in the workspace.

mod check;
mod sexp;
mod sort;
mod syntax;
mod term;
mod var;

pub use check::{check_sorts, Signature, SortError};
pub use sexp::{parse_sexps, Sexp, SexpError};
pub use sort::Sort;
pub use syntax::{parse_sort, parse_sort_str, parse_term, parse_term_str, sort_to_sexp, term_to_sexp, SyntaxError};
pub use term::{rename_free, retag, substitute, CmpOp, Quantifier, RetagError, SubstError, Term};
pub use var::{Tag, Var};

pub use num_bigint::BigInt;
