use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cli::{run_benchmarks, run_oracle, to_json, verify, OracleOptions, Project, VerifyOptions, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "qhenum", version, about = "Verify quantitative hyperproperties by trace enumeration and model counting")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args, Clone)]
struct SolverArgs {
    /// Solver executable; defaults to $QHENUM_SOLVER, then `z3` on PATH.
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Per-query timeout in milliseconds.
    #[arg(long, default_value_t = 60_000)]
    timeout: u64,
    /// Write every solver query and reply here.
    #[arg(long)]
    debug_dir: Option<PathBuf>,
    /// Concurrent obligations within a stage.
    #[arg(long, default_value_t = 4)]
    threads: usize,
}

impl SolverArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            solver: self.solver.clone(),
            timeout_ms: self.timeout,
            debug_dir: self.debug_dir.clone(),
            threads: self.threads.max(1),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full pipeline on one project directory.
    Verify {
        project: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Leave timing fields out of the JSON.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a small instance by explicit enumeration.
    Oracle {
        project: PathBuf,
        /// Parameter override, e.g. `--set R=3`.
        #[arg(long = "set", value_parser = parse_binding)]
        set: Vec<(String, i64)>,
        /// Number of sampled pivots (0 skips class counting).
        #[arg(long)]
        pivots: Option<u64>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Verify every project under a suite directory.
    Bench {
        suite: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
}

fn parse_binding(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    Ok((k.trim().to_string(), v.trim().parse().map_err(|e| format!("{}: {}", v, e))?))
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match path {
        None => Ok(()),
        Some(p) if p.as_os_str() == "-" => {
            print!("{}", text);
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {}", p.display(), e)),
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.cmd {
        Cmd::Verify { project, solver, json, no_timing } => {
            let p = Project::load(&project).map_err(|e| e.to_string())?;
            let r = verify(&p, &solver.options());
            for w in &r.warnings {
                eprintln!("warning: {}", w);
            }
            for s in &r.stages {
                eprintln!(
                    "{:<17} {:?}{}",
                    s.stage,
                    s.verdict,
                    s.detail.as_ref().map(|d| format!("  ({})", d)).unwrap_or_default()
                );
            }
            eprintln!("{}: {:?} in {:.2}s", r.project, r.verdict, r.time_ms as f64 / 1000.0);
            emit(&json, &to_json(&r, !no_timing))?;
            Ok(r.verdict.exit_code())
        }
        Cmd::Oracle { project, set, pivots, json } => {
            let s = run_oracle(&project, &OracleOptions { params: set, pivots }).map_err(|e| e.to_string())?;
            let classes = match (s.min_classes, s.max_classes) {
                (Some(a), Some(b)) => format!("classes {}..{} over {} pivots", a, b, s.pivots),
                _ => "no pivots".to_string(),
            };
            let valid = s.valid_count.map(|n| format!(", |Valid| = {}", n)).unwrap_or_default();
            eprintln!(
                "{} {:?}: {}{}, bound {} {}: {}",
                s.project,
                s.params,
                classes,
                valid,
                s.cmp,
                s.bound,
                if s.holds { "holds" } else { "VIOLATED" }
            );
            emit(&json, &to_json(&s, true))?;
            Ok(if s.holds { 0 } else { 1 })
        }
        Cmd::Bench { suite, solver, json, no_timing } => {
            let s = run_benchmarks(&suite, &solver.options()).map_err(|e| e.to_string())?;
            for w in &s.warnings {
                eprintln!("warning: {}", w);
            }
            for r in &s.reports {
                for w in &r.warnings {
                    eprintln!("warning: {}: {}", r.project, w);
                }
            }
            let table = format!("{}{}/{} verified\n", s.table(), s.verified(), s.rows.len());
            // Keep stdout clean when the JSON goes there.
            if json.as_ref().is_some_and(|p| p.as_os_str() == "-") {
                eprint!("{}", table);
            } else {
                print!("{}", table);
            }
            emit(&json, &to_json(&s, !no_timing))?;
            Ok(s.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
