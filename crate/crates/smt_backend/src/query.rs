use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use term_core::{sort_to_sexp, term_to_sexp, Sort, Term, Var};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Sort(String),
    Fun { name: String, args: Vec<Sort>, ret: Sort },
}

#[derive(Debug, Error, PartialEq)]
pub enum EmitError {
    #[error("query `{query}`: `{symbol}` is used but never declared")]
    Undeclared { query: String, symbol: String },
}

/// One closed satisfiability check.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    /// Provenance label; also names the transcript file.
    pub label: String,
    pub logic: String,
    pub options: Vec<(String, String)>,
    pub decls: Vec<Decl>,
    pub assertions: Vec<Term>,
    pub get_model: bool,
    pub timeout_ms: Option<u64>,
}

impl Default for Query {
    fn default() -> Query {
        Query {
            label: String::new(),
            logic: "AUFLIA".into(),
            options: Vec::new(),
            decls: Vec::new(),
            assertions: Vec::new(),
            get_model: false,
            timeout_ms: None,
        }
    }
}

impl Query {
    pub fn new(label: impl Into<String>) -> Query {
        Query { label: label.into(), ..Query::default() }
    }

    pub fn option(mut self, name: &str, value: &str) -> Query {
        self.options.push((name.into(), value.into()));
        self
    }

    pub fn with_model(mut self) -> Query {
        self.get_model = true;
        self
    }

    fn declared(&self, name: &str) -> bool {
        self.decls.iter().any(|d| matches!(d, Decl::Fun { name: n, .. } if n == name))
    }

    pub fn declare_sort(&mut self, name: &str) {
        if !self.decls.iter().any(|d| matches!(d, Decl::Sort(n) if n == name)) {
            self.decls.push(Decl::Sort(name.into()));
        }
    }

    /// Declare a function symbol once; repeated declarations are ignored.
    pub fn declare_fun(&mut self, name: &str, args: Vec<Sort>, ret: Sort) {
        if !self.declared(name) {
            self.decls.push(Decl::Fun { name: name.into(), args, ret });
        }
    }

    pub fn declare_const(&mut self, v: &Var, sort: Sort) {
        self.declare_fun(&v.to_string(), vec![], sort);
    }

    /// Declare every free variable of the assertions found in `env`, in
    /// sorted order so the text is stable.
    pub fn declare_from(&mut self, env: &BTreeMap<Var, Sort>) {
        let fv: BTreeSet<Var> = self.assertions.iter().flat_map(|a| a.free_vars()).collect();
        for v in fv {
            if let Some(s) = env.get(&v) {
                self.declare_const(&v, s.clone());
            }
        }
    }

    /// Add an assertion. Nonlinear terms switch the logic to `ALL`, since
    /// solvers enforce the arithmetic fragment named by the logic.
    pub fn assert(&mut self, t: Term) {
        if !t.is_linear() && self.logic.contains("LIA") {
            self.logic = "ALL".into();
        }
        self.assertions.push(t);
    }

    fn check_declared(&self) -> Result<(), EmitError> {
        let undeclared = |symbol: String| EmitError::Undeclared { query: self.label.clone(), symbol };
        for a in &self.assertions {
            for v in a.free_vars() {
                let s = v.to_string();
                if !self.declared(&s) {
                    return Err(undeclared(s));
                }
            }
            for f in a.applied_symbols() {
                if !self.declared(&f) {
                    return Err(undeclared(f));
                }
            }
        }
        Ok(())
    }

    /// Deterministic SMT-LIB2 text for this query.
    pub fn emit(&self) -> Result<String, EmitError> {
        self.check_declared()?;
        let mut out = String::new();
        writeln!(out, "(set-logic {})", self.logic).unwrap();
        for (k, v) in &self.options {
            writeln!(out, "(set-option :{} {})", k.trim_start_matches(':'), v).unwrap();
        }
        for d in &self.decls {
            match d {
                Decl::Sort(n) => writeln!(out, "(declare-sort {} 0)", n).unwrap(),
                Decl::Fun { name, args, ret } if args.is_empty() => {
                    writeln!(out, "(declare-const {} {})", name, sort_to_sexp(ret)).unwrap()
                }
                Decl::Fun { name, args, ret } => {
                    let a: Vec<String> = args.iter().map(|s| sort_to_sexp(s).to_string()).collect();
                    writeln!(out, "(declare-fun {} ({}) {})", name, a.join(" "), sort_to_sexp(ret)).unwrap()
                }
            }
        }
        for a in &self.assertions {
            writeln!(out, "(assert {})", term_to_sexp(a)).unwrap();
        }
        out.push_str("(check-sat)\n(get-info :reason-unknown)\n");
        if self.get_model {
            out.push_str("(get-model)\n");
        }
        Ok(out)
    }
}
