use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::project::{Project, SYSTEM_FILE};
use crate::report::{FinalVerdict, ObligationVerdict, Report};
use crate::verify::{verify_with, VerifyOptions};
use crate::ConfigError;

pub const BENCH_SCHEMA: &str = "bench/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub project: String,
    pub state_vars: usize,
    pub proof_size: usize,
    pub annotations: usize,
    pub verdict: FinalVerdict,
    /// First obligation that was not proved, for failed rows.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_at: Option<String>,
    pub time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub schema: String,
    pub rows: Vec<BenchRow>,
    pub reports: Vec<Report>,
    pub warnings: Vec<String>,
}

impl BenchSummary {
    pub fn verified(&self) -> usize {
        self.rows.iter().filter(|r| r.verdict == FinalVerdict::Verified).count()
    }

    /// 1 if anything failed, else 2 if anything was unknown, else 0.
    pub fn exit_code(&self) -> i32 {
        self.rows.iter().map(|r| r.verdict.exit_code()).fold(0, |a, c| if a == 1 || c == 1 { 1 } else { a.max(c) })
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<22} {:>5} {:>6} {:>6} {:>9}  {}\n", "project", "vars", "proof", "annot", "time", "verdict");
        for r in &self.rows {
            let v = match r.verdict {
                FinalVerdict::Verified => "QHP-verified".to_string(),
                FinalVerdict::StageFailed => format!("failed at {}", r.failed_at.as_deref().unwrap_or("?")),
                FinalVerdict::Unknown => format!("unknown at {}", r.failed_at.as_deref().unwrap_or("?")),
            };
            out += &format!(
                "{:<22} {:>5} {:>6} {:>6} {:>8.2}s  {}\n",
                r.project,
                r.state_vars,
                r.proof_size,
                r.annotations,
                r.time_ms as f64 / 1000.0,
                v
            );
        }
        out
    }
}

/// Subdirectories holding a system file, in name order.
pub fn project_dirs(suite: &Path) -> Result<Vec<PathBuf>, ConfigError> {
    let rd = std::fs::read_dir(suite).map_err(|e| ConfigError::Io(format!("{}: {}", suite.display(), e)))?;
    let mut dirs: Vec<PathBuf> = rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.join(SYSTEM_FILE).is_file()).collect();
    dirs.sort();
    Ok(dirs)
}

pub fn run_benchmarks(suite: &Path, opts: &VerifyOptions) -> Result<BenchSummary, ConfigError> {
    let dirs = project_dirs(suite)?;
    let mut s = BenchSummary { schema: BENCH_SCHEMA.into(), rows: vec![], reports: vec![], warnings: vec![] };
    if dirs.is_empty() {
        s.warnings.push(format!("no projects under {}", suite.display()));
        return Ok(s);
    }
    let solver = opts.solver();
    let id = solver.version();
    for d in dirs {
        let p = Project::load(&d)?;
        let r = verify_with(&p, &solver, &id, opts);
        let failed_at = if r.verified() {
            None
        } else {
            let stage = r.failed_stage.clone().unwrap_or_default();
            Some(match r.first_failed_obligation() {
                Some(o) if o.verdict != ObligationVerdict::Proved => format!("{}/{}", stage, o.name),
                _ => stage,
            })
        };
        s.rows.push(BenchRow {
            project: p.name.clone(),
            state_vars: p.system.vars.len(),
            proof_size: p.proof_size(),
            annotations: p.annotations(),
            verdict: r.verdict,
            failed_at,
            time_ms: r.time_ms,
        });
        s.reports.push(r);
    }
    Ok(s)
}
