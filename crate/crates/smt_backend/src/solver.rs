use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use term_core::{parse_sexps, Sexp};
use thiserror::Error;

use crate::model::{parse_model, Model};
use crate::query::{EmitError, Query};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "QHENUM_SOLVER";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    pub model: Option<Model>,
    pub wall_time_ms: u64,
    /// Why the answer is unknown, when the solver or the driver said so.
    pub reason: Option<String>,
    pub transcript: String,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cannot start solver `{path}`: {source}")]
    Spawn { path: String, source: std::io::Error },
    #[error("solver protocol error in `{label}`: {detail}")]
    Protocol { label: String, detail: String },
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error("i/o error talking to the solver: {0}")]
    Io(#[from] std::io::Error),
}

/// Anything that can decide a [`Query`].
pub trait Backend: Sync {
    fn solve(&self, q: &Query) -> Result<Verdict, SolverError>;
    fn id(&self) -> String;
}

/// External SMT-LIB2 executable, one child process per query.
#[derive(Clone, Debug)]
pub struct Solver {
    pub path: PathBuf,
    pub args: Vec<String>,
    pub timeout_ms: u64,
    pub debug_dir: Option<PathBuf>,
}

fn default_args(path: &Path) -> Vec<String> {
    let name = path.file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
    if name.contains("z3") {
        vec!["-in".into(), "-smt2".into()]
    } else if name.contains("cvc") {
        vec!["--lang=smt2".into(), "--produce-models".into(), "--incremental".into()]
    } else {
        vec![]
    }
}

impl Solver {
    pub fn new(path: impl Into<PathBuf>) -> Solver {
        let path = path.into();
        Solver { args: default_args(&path), path, timeout_ms: 30_000, debug_dir: None }
    }

    /// Explicit path, else the environment variable, else `z3` on `PATH`.
    pub fn resolve(explicit: Option<&Path>) -> Solver {
        match explicit {
            Some(p) => Solver::new(p),
            None => match std::env::var_os(SOLVER_ENV) {
                Some(p) if !p.is_empty() => Solver::new(PathBuf::from(p)),
                _ => Solver::new("z3"),
            },
        }
    }

    pub fn with_timeout(mut self, ms: u64) -> Solver {
        self.timeout_ms = ms;
        self
    }

    pub fn with_debug_dir(mut self, dir: Option<PathBuf>) -> Solver {
        self.debug_dir = dir;
        self
    }

    /// First line of `--version`, or the path when that fails.
    pub fn version(&self) -> String {
        Command::new(&self.path)
            .arg("--version")
            .output()
            .ok()
            .and_then(|o| String::from_utf8(o.stdout).ok())
            .and_then(|s| s.lines().next().map(str::to_string))
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| self.path.display().to_string())
    }

    fn run(&self, text: &str, timeout: Duration) -> Result<(Option<String>, String), SolverError> {
        let mut child = Command::new(&self.path)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SolverError::Spawn { path: self.path.display().to_string(), source })?;
        let mut stdin = child.stdin.take().unwrap();
        let mut stdout = child.stdout.take().unwrap();
        let mut stderr = child.stderr.take().unwrap();
        let reader = std::thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let err_reader = std::thread::spawn(move || {
            let mut s = String::new();
            let _ = stderr.read_to_string(&mut s);
            s
        });
        // A solver that dies early closes its stdin; that surfaces below.
        let _ = stdin.write_all(text.as_bytes()).and_then(|_| stdin.write_all(b"(exit)\n"));
        drop(stdin);
        let start = Instant::now();
        let timed_out = loop {
            if child.try_wait()?.is_some() {
                break false;
            }
            if start.elapsed() >= timeout {
                let _ = child.kill();
                let _ = child.wait();
                break true;
            }
            std::thread::sleep(Duration::from_millis(2));
        };
        if timed_out {
            // Grandchildren may still hold the pipes; leave the readers detached.
            return Ok((None, String::new()));
        }
        let out = reader.join().expect("reader thread").unwrap_or_default();
        let err = err_reader.join().expect("stderr thread");
        Ok((Some(out), err))
    }

    fn dump(&self, q: &Query, text: &str, reply: &str) {
        let Some(dir) = &self.debug_dir else { return };
        let name: String =
            q.label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        let mut body = text.to_string();
        body.push_str("; reply:\n");
        for l in reply.lines() {
            body.push_str("; ");
            body.push_str(l);
            body.push('\n');
        }
        let _ = std::fs::create_dir_all(dir);
        let _ = std::fs::write(dir.join(format!("{}.smt2", name)), body);
    }
}

fn protocol(q: &Query, detail: impl Into<String>) -> SolverError {
    SolverError::Protocol { label: q.label.clone(), detail: detail.into() }
}

fn parse_reply(q: &Query, out: &str) -> Result<(Status, Option<Model>, Option<String>), SolverError> {
    let items = parse_sexps(out).map_err(|e| protocol(q, format!("{}: {}", e, out.trim())))?;
    let mut it = items.iter();
    let status = match it.next() {
        Some(Sexp::Atom(a)) if a == "sat" => Status::Sat,
        Some(Sexp::Atom(a)) if a == "unsat" => Status::Unsat,
        Some(Sexp::Atom(a)) if a == "unknown" => Status::Unknown,
        Some(other) => return Err(protocol(q, format!("unexpected reply {}", other))),
        None => return Err(protocol(q, "empty reply")),
    };
    let rest: Vec<&Sexp> = it.collect();
    let mut model = None;
    let mut reason = None;
    for r in rest {
        if r.head() == Some(":reason-unknown") {
            if status == Status::Unknown {
                let why = r.as_list().and_then(|v| v.get(1)).and_then(Sexp::as_atom).unwrap_or("").trim_matches('"');
                if !why.is_empty() {
                    reason = Some(why.to_string());
                }
            }
        } else if r.head() == Some("error") {
            // Asking for a model after unsat is an error we expect.
            if status == Status::Sat {
                return Err(protocol(q, r.to_string()));
            }
            reason.get_or_insert_with(|| r.to_string());
        } else if status != Status::Unsat && q.get_model {
            model = parse_model(r);
        }
    }
    if status != Status::Sat {
        model = None;
    }
    Ok((status, model, reason))
}

impl Backend for Solver {
    fn solve(&self, q: &Query) -> Result<Verdict, SolverError> {
        let text = q.emit()?;
        let timeout = Duration::from_millis(q.timeout_ms.unwrap_or(self.timeout_ms));
        let start = Instant::now();
        let (out, err) = self.run(&text, timeout)?;
        let wall_time_ms = start.elapsed().as_millis() as u64;
        let Some(out) = out else {
            self.dump(q, &text, "timeout");
            return Ok(Verdict {
                status: Status::Unknown,
                model: None,
                wall_time_ms,
                reason: Some("timeout".into()),
                transcript: text,
            });
        };
        self.dump(q, &text, &out);
        if out.trim().is_empty() {
            return Err(protocol(q, format!("no output; stderr: {}", err.trim())));
        }
        let (status, model, reason) = parse_reply(q, &out)?;
        let mut transcript = text;
        transcript.push_str(&out);
        Ok(Verdict { status, model, wall_time_ms, reason, transcript })
    }

    fn id(&self) -> String {
        self.version()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replies_parse() {
        let q = Query::new("t").with_model();
        let (s, m, _) = parse_reply(&q, "sat\n((define-fun x () Int 3))\n").unwrap();
        assert_eq!(s, Status::Sat);
        assert_eq!(m.unwrap().int("x"), Some(3.into()));
        let (s, m, _) = parse_reply(&q, "unsat\n(:reason-unknown \"\")\n(error \"model is not available\")\n").unwrap();
        assert_eq!((s, m), (Status::Unsat, None));
        let (s, _, why) = parse_reply(&q, "unknown\n(:reason-unknown \"(incomplete quantifiers)\")\n(error \"no model\")\n").unwrap();
        assert_eq!((s, why.as_deref()), (Status::Unknown, Some("(incomplete quantifiers)")));
        assert!(parse_reply(&q, "(error \"bad\")").is_err());
        assert!(parse_reply(&q, "").is_err());
    }
}
