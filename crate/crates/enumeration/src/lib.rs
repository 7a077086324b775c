//! Trace enumeration witnesses and their verification conditions.

mod discharge;
mod vcs;
mod witness;

pub use discharge::{discharge, DischargeOptions, DischargeReport, ObligationResult, ObligationVerdict};
pub use vcs::{gen_injective_vcs, gen_surjective_vcs, BundleKind, Obligation, VcBundle};
pub use witness::{parse_witness, parse_witness_str, Def, EnumerationWitness};

use term_core::SortError;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnumError {
    #[error("witness syntax: {0}")]
    Syntax(String),
    #[error("missing witness: {0}")]
    MissingWitness(String),
    #[error("successor definitions are cyclic: {0}")]
    CyclicSuccessor(String),
    #[error("{label}: {err}")]
    Sort { label: String, err: SortError },
    #[error("property: {0}")]
    Property(String),
}
