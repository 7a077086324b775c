//! Project loading, the end-to-end verification pipeline, the benchmark
//! runner and the explicit-state oracle front end behind `qhenum`.

mod bench;
mod oracle_run;
mod project;
mod report;
mod verify;

use thiserror::Error;

pub use bench::{project_dirs, run_benchmarks, BenchRow, BenchSummary, BENCH_SCHEMA};
pub use oracle_run::{run_oracle, OracleOptions, OracleSummary, ORACLE_SCHEMA, PIVOT_SEED};
pub use project::{Project, ENUMERATION_FILE, INSTANCE_FILE, PROOF_FILE, PROPERTY_FILE, SYSTEM_FILE};
pub use report::{
    strip_timing, to_json, FinalVerdict, ObligationRow, ObligationVerdict, PropertySummary, Report, StageReport, StageVerdict,
    REPORT_SCHEMA,
};
pub use verify::{tool_id, verify, verify_with, VerifyOptions, STAGES};

/// Problems with the inputs themselves; exit code 3.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Io(String),
    #[error("{file}: {detail}")]
    Parse { file: String, detail: String },
    #[error("{0}")]
    Resolve(String),
}

pub const EXIT_CONFIG: i32 = 3;
