//! SMT-LIB2 query emission and an external solver driven over pipes.

mod model;
mod query;
mod solver;

pub use model::{parse_model, Model, ModelEntry};
pub use query::{Decl, EmitError, Query};
pub use solver::{Backend, Solver, SolverError, Status, Verdict, SOLVER_ENV};
