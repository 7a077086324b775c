use std::collections::{BTreeMap, BTreeSet};

use term_core::{check_sorts, rename_free, Signature, Sort, SortError, Tag, Term, Var};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("parameter `{0}` is not a state variable")]
    UnknownParam(String),
    #[error("state variable `{0}` declared twice")]
    DuplicateVar(String),
    #[error("{part} mentions `{var}`, which is not allowed there")]
    StrayVar { part: &'static str, var: Var },
    #[error("{part}: {err}")]
    Sort { part: &'static str, err: SortError },
    #[error("{part} is not boolean")]
    NotFormula { part: &'static str },
    #[error("{0}")]
    Syntax(String),
}

/// Def. 1 style system: state variables, parameters, `init` over `X` and
/// `tx` over `X` and `X!`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSystem {
    pub name: String,
    pub vars: Vec<(String, Sort)>,
    pub params: Vec<String>,
    pub init: Term,
    pub tx: Term,
    pub sig: Signature,
}

/// Rename each variable of `state` to its next-state tag.
pub fn prime_state(t: &Term, state: &BTreeSet<Var>) -> Term {
    rename_free(t, &|v| if state.contains(v) { v.tag.primed().map(|p| v.with_tag(p)) } else { None })
}

fn move_tags(t: &Term, cur: Tag, next: Tag) -> Term {
    rename_free(t, &|v| match v.tag {
        Tag::Plain => Some(v.with_tag(cur)),
        Tag::Primed => Some(v.with_tag(next)),
        _ => None,
    })
}

impl TransitionSystem {
    pub fn new(
        name: &str,
        vars: Vec<(String, Sort)>,
        params: Vec<String>,
        init: Term,
        tx: Term,
        sig: Signature,
    ) -> Result<TransitionSystem, SystemError> {
        let ts = TransitionSystem { name: name.into(), vars, params, init, tx, sig };
        ts.validate()?;
        Ok(ts)
    }

    fn validate(&self) -> Result<(), SystemError> {
        let mut seen = BTreeSet::new();
        for (n, _) in &self.vars {
            if !seen.insert(n) {
                return Err(SystemError::DuplicateVar(n.clone()));
            }
        }
        for p in &self.params {
            if !seen.contains(p) {
                return Err(SystemError::UnknownParam(p.clone()));
            }
        }
        let cur = self.env(Tag::Plain);
        let mut both = cur.clone();
        both.extend(self.env(Tag::Primed));
        for (part, t, env) in [("init", &self.init, &cur), ("tx", &self.tx, &both)] {
            let constant = |v: &Var| v.tag == Tag::Plain && self.sig.rank(&v.base).is_some_and(|(a, _)| a.is_empty());
            if let Some(v) = t.free_vars().into_iter().find(|v| !env.contains_key(v) && !constant(v)) {
                return Err(SystemError::StrayVar { part, var: v });
            }
            match check_sorts(t, &self.sig, env) {
                Ok(Sort::Bool) => {}
                Ok(_) => return Err(SystemError::NotFormula { part }),
                Err(err) => return Err(SystemError::Sort { part, err }),
            }
        }
        Ok(())
    }

    pub fn var_sort(&self, name: &str) -> Option<&Sort> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn var_names(&self) -> Vec<String> {
        self.vars.iter().map(|(n, _)| n.clone()).collect()
    }

    /// State variables under one tag.
    pub fn env(&self, tag: Tag) -> BTreeMap<Var, Sort> {
        self.vars.iter().map(|(n, s)| (Var::new(n.clone(), tag), s.clone())).collect()
    }

    pub fn state_set(&self, tag: Tag) -> BTreeSet<Var> {
        self.vars.iter().map(|(n, _)| Var::new(n.clone(), tag)).collect()
    }

    /// Init over copy `i`.
    pub fn init_at(&self, i: u32) -> Term {
        move_tags(&self.init, Tag::Indexed(i), Tag::IndexedPrimed(i))
    }

    /// Tx from copy `i` to its primed copy.
    pub fn tx_at(&self, i: u32) -> Term {
        move_tags(&self.tx, Tag::Indexed(i), Tag::IndexedPrimed(i))
    }

    /// Top-level `x! = e` conjuncts of `tx` whose right side has no primed
    /// variable, keyed by `x`.
    pub fn functional_updates(&self) -> BTreeMap<String, Term> {
        let mut out = BTreeMap::new();
        for c in self.tx.conjuncts() {
            if let Term::Cmp(term_core::CmpOp::Eq, l, r) = c {
                for (a, b) in [(l, r), (r, l)] {
                    if let Term::Var(v) = a.as_ref() {
                        let cur_only = b.free_vars().iter().all(|w| !w.tag.is_primed());
                        if v.tag == Tag::Primed && cur_only && self.var_sort(&v.base).is_some() {
                            out.entry(v.base.clone()).or_insert_with(|| (**b).clone());
                            break;
                        }
                    }
                }
            }
        }
        out
    }

    /// Every top-level `x! = e` conjunct, keyed by `x`. Unlike
    /// [`functional_updates`](Self::functional_updates), `e` may mention
    /// primed variables.
    pub fn update_equations(&self) -> BTreeMap<String, Term> {
        let mut out = BTreeMap::new();
        for c in self.tx.conjuncts() {
            if let Term::Cmp(term_core::CmpOp::Eq, l, r) = c {
                for (a, b) in [(l, r), (r, l)] {
                    if let Term::Var(v) = a.as_ref() {
                        if v.tag == Tag::Primed && self.var_sort(&v.base).is_some() && !b.free_vars().contains(v) {
                            out.entry(v.base.clone()).or_insert_with(|| (**b).clone());
                            break;
                        }
                    }
                }
            }
        }
        out
    }
}

/// `k` renamed copies of one system; parameters stay per copy.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedSystem {
    pub base: TransitionSystem,
    pub k: u32,
}

impl ComposedSystem {
    pub fn new(base: &TransitionSystem, k: u32) -> ComposedSystem {
        assert!(k >= 1, "self-composition needs at least one copy");
        ComposedSystem { base: base.clone(), k }
    }

    pub fn copies(&self) -> impl Iterator<Item = u32> {
        1..=self.k
    }

    pub fn env(&self) -> BTreeMap<Var, Sort> {
        self.copies().flat_map(|i| self.base.env(Tag::Indexed(i))).collect()
    }

    pub fn primed_env(&self) -> BTreeMap<Var, Sort> {
        self.copies().flat_map(|i| self.base.env(Tag::IndexedPrimed(i))).collect()
    }

    pub fn state_set(&self) -> BTreeSet<Var> {
        self.env().into_keys().collect()
    }

    pub fn init(&self) -> Term {
        Term::and(self.copies().map(|i| self.base.init_at(i)).collect())
    }

    pub fn tx(&self) -> Term {
        Term::and(self.copies().map(|i| self.base.tx_at(i)).collect())
    }

    /// The product as an ordinary system over variables `x.i`.
    pub fn flatten(&self) -> TransitionSystem {
        let flat = |t: &Term| {
            rename_free(t, &|v| match v.tag {
                Tag::Indexed(i) => Some(Var::plain(format!("{}.{}", v.base, i))),
                Tag::IndexedPrimed(i) => Some(Var::new(format!("{}.{}", v.base, i), Tag::Primed)),
                _ => None,
            })
        };
        let vars =
            self.copies().flat_map(|i| self.base.vars.iter().map(move |(n, s)| (format!("{}.{}", n, i), s.clone()))).collect();
        let params = self.copies().flat_map(|i| self.base.params.iter().map(move |p| format!("{}.{}", p, i))).collect();
        TransitionSystem {
            name: format!("{}^{}", self.base.name, self.k),
            vars,
            params,
            init: flat(&self.init()),
            tx: flat(&self.tx()),
            sig: self.base.sig.clone(),
        }
    }
}

impl TransitionSystem {
    pub fn self_compose(&self, k: u32) -> ComposedSystem {
        ComposedSystem::new(self, k)
    }
}
