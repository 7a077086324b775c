use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use smt_backend::{Backend, Model, Query, Status};
use term_core::{check_sorts, CmpOp, Signature, Sort, Tag, Term, Var};

use crate::script::{CountApp, CountDecl, ExplicitModel, ModelValue, RecFun, Rule, RuleApp, Witness};
use crate::CountError;

/// Prefix of the uninterpreted function standing for a count in solver queries.
pub const COUNT_PREFIX: &str = "count.";

type Env = BTreeMap<Var, Sort>;

/// Literal arguments of recursive functions up to this far above the base
/// are unfolded completely.
const UNFOLD_LIMIT: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Valid,
    Sat,
    Unsat,
}

#[derive(Clone, Debug)]
pub struct PremiseResult {
    pub query: String,
    pub expect: Expect,
    pub status: Status,
    pub time_ms: u64,
}

/// An admitted statement about counts, universally quantified over the
/// integer parameters it mentions.
#[derive(Clone, Debug, PartialEq)]
pub struct CountFact {
    pub step: String,
    pub rule: &'static str,
    pub guard: Term,
    pub relation: Term,
    /// Labels of the solver queries that justified it.
    pub premises: Vec<String>,
}

impl CountFact {
    pub fn metas(&self) -> BTreeSet<Var> {
        let mut v = self.guard.free_vars();
        v.extend(self.relation.free_vars());
        v
    }

    /// The fact as a closed formula over count symbols.
    pub fn formula(&self) -> Term {
        let body = match &self.guard {
            Term::Bool(true) => self.relation.clone(),
            g => Term::implies(g.clone(), self.relation.clone()),
        };
        let metas: Vec<(String, Sort)> = self.metas().into_iter().map(|v| (v.base, Sort::Int)).collect();
        if metas.is_empty() {
            body
        } else {
            Term::forall(metas, body)
        }
    }
}

impl fmt::Display for CountFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.guard {
            Term::Bool(true) => write!(f, "{}", self.relation),
            g => write!(f, "{} => {}", g, self.relation),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct KernelOptions {
    /// Prepended to every query label.
    pub prefix: String,
    pub timeout_ms: Option<u64>,
}

/// Admits count facts one rule application at a time. Nothing is admitted
/// unless every premise query came back with the expected answer.
pub struct Kernel<'a> {
    decls: BTreeMap<String, CountDecl>,
    recs: BTreeMap<String, RecFun>,
    sig: Signature,
    facts: Vec<CountFact>,
    backend: &'a dyn Backend,
    opts: KernelOptions,
    pub premises: Vec<PremiseResult>,
    step: String,
    /// Uninterpreted symbols from outside the script, declared on use.
    external: Signature,
}

fn sort_err(context: &str, e: impl fmt::Display) -> CountError {
    CountError::Sort { context: context.to_string(), detail: e.to_string() }
}

fn copy_var(name: &str, k: u32) -> Var {
    Var::new(name, Tag::Indexed(k))
}

fn differ(a: &BTreeMap<String, Term>, b: &BTreeMap<String, Term>) -> Term {
    Term::or(a.iter().map(|(k, x)| Term::ne(x.clone(), b[k].clone())).collect())
}

fn subst_n(t: &Term, n: &str, by: Term) -> Term {
    let mut m = BTreeMap::new();
    m.insert(Var::plain(n), by);
    t.subst(&m)
}

fn next(n: &str) -> Term {
    Term::add(Term::var(Var::plain(n)), Term::int(1))
}

impl<'a> Kernel<'a> {
    pub fn new(
        decls: &[CountDecl],
        user_recs: &[RecFun],
        backend: &'a dyn Backend,
        opts: KernelOptions,
    ) -> Result<Kernel<'a>, CountError> {
        let mut recs = BTreeMap::new();
        for r in RecFun::builtins().into_iter().chain(user_recs.iter().cloned()) {
            if recs.contains_key(&r.name) {
                return Err(CountError::Syntax(format!("function `{}` declared twice", r.name)));
            }
            recs.insert(r.name.clone(), r);
        }
        let mut sig = Signature::new();
        for r in recs.keys() {
            sig.declare_fun(r.clone(), vec![Sort::Int], Sort::Int).map_err(|e| sort_err(r, e))?;
        }
        for r in recs.values() {
            // The step is usually nonlinear, so only its symbols are checked.
            check_sorts(&r.base_value, &sig, &Env::new()).map_err(|e| sort_err(&r.name, e))?;
            let mut names = BTreeSet::new();
            r.step.walk(&mut |t| {
                if let Term::App(f, _) = t {
                    names.insert(f.clone());
                }
            });
            if let Some(f) = names.into_iter().find(|f| !recs.contains_key(f)) {
                return Err(CountError::UnknownCount(f));
            }
        }
        let mut map = BTreeMap::new();
        for d in decls {
            if recs.contains_key(&d.name) || map.contains_key(&d.name) {
                return Err(CountError::Syntax(format!("`{}` declared twice", d.name)));
            }
            let mut env = Env::new();
            for p in &d.params {
                if env.insert(Var::plain(p.clone()), Sort::Int).is_some() {
                    return Err(CountError::Syntax(format!("{}: parameter {} repeated", d.name, p)));
                }
            }
            if d.vars.is_empty() {
                return Err(CountError::Syntax(format!("{}: no counted variables", d.name)));
            }
            for (v, s) in &d.vars {
                if env.insert(Var::plain(v.clone()), s.clone()).is_some() {
                    return Err(CountError::Syntax(format!("{}: `{}` is both counted and a parameter, or repeated", d.name, v)));
                }
            }
            match check_sorts(&d.formula, &sig, &env) {
                Ok(Sort::Bool) => {}
                Ok(s) => return Err(sort_err(&d.name, format!("formula has sort {}", s))),
                Err(e) => return Err(sort_err(&d.name, e)),
            }
            map.insert(d.name.clone(), d.clone());
        }
        Ok(Kernel {
            decls: map,
            recs,
            sig,
            facts: vec![],
            backend,
            opts,
            premises: vec![],
            step: String::new(),
            external: Signature::new(),
        })
    }

    pub fn facts(&self) -> &[CountFact] {
        &self.facts
    }

    pub fn decl(&self, name: &str) -> Option<&CountDecl> {
        self.decls.get(name)
    }

    fn lookup(&self, app: &CountApp) -> Result<&CountDecl, CountError> {
        let d = self.decls.get(&app.name).ok_or_else(|| CountError::UnknownCount(app.name.clone()))?;
        if d.params.len() != app.args.len() {
            return Err(CountError::Arity { name: app.name.clone(), expected: d.params.len(), found: app.args.len() });
        }
        for a in &app.args {
            self.int_term(a, &Env::new(), &app.name)?;
        }
        Ok(d)
    }

    /// Sort-check a linear integer term whose unknown plain variables are parameters.
    fn int_term(&self, t: &Term, env: &Env, context: &str) -> Result<(), CountError> {
        let env = with_metas(t, env);
        match check_sorts(t, &self.sig, &env) {
            Ok(Sort::Int) => Ok(()),
            Ok(s) => Err(sort_err(context, format!("{} has sort {}, expected Int", t, s))),
            Err(e) => Err(sort_err(context, e)),
        }
    }

    /// Check every application in a count relation: counts, recursive
    /// functions, nothing else.
    fn relation_symbols(&self, t: &Term) -> Result<(), CountError> {
        let mut err = None;
        t.walk(&mut |s| {
            if let Term::App(f, args) = s {
                let want = match (self.decls.get(f), self.recs.get(f)) {
                    (Some(d), _) => d.params.len(),
                    (None, Some(_)) => 1,
                    _ => {
                        err.get_or_insert(CountError::UnknownCount(f.clone()));
                        return;
                    }
                };
                if args.len() != want {
                    err.get_or_insert(CountError::Arity { name: f.clone(), expected: want, found: args.len() });
                }
            }
        });
        err.map_or(Ok(()), Err)
    }

    /// Fresh copy `k` of the counted variables of `d`.
    fn copy(d: &CountDecl, k: u32, env: &mut Env) -> BTreeMap<String, Term> {
        d.vars
            .iter()
            .map(|(v, s)| {
                env.insert(copy_var(v, k), s.clone());
                (v.clone(), Term::var(copy_var(v, k)))
            })
            .collect()
    }

    /// The formula of `app` with its counted variables replaced by `vars`.
    fn inst(&self, app: &CountApp, vars: &BTreeMap<String, Term>) -> Result<Term, CountError> {
        let d = self.lookup(app)?;
        let mut m = BTreeMap::new();
        for (p, a) in d.params.iter().zip(&app.args) {
            m.insert(Var::plain(p.clone()), a.clone());
        }
        for (v, _) in &d.vars {
            m.insert(Var::plain(v.clone()), vars[v].clone());
        }
        Ok(d.formula.subst(&m))
    }

    /// Resolve a witness naming every variable in `targets`, reading plain
    /// names from `scope`.
    fn resolve(
        &self,
        w: &Witness,
        targets: &[(String, Sort)],
        scope: &BTreeMap<String, Term>,
        env: &Env,
    ) -> Result<BTreeMap<String, Term>, CountError> {
        let m: BTreeMap<Var, Term> = scope.iter().map(|(k, t)| (Var::plain(k.clone()), t.clone())).collect();
        let mut out = BTreeMap::new();
        for (v, t) in w {
            let Some((_, sort)) = targets.iter().find(|(n, _)| n == v) else {
                return Err(CountError::Witness(format!("`{}` is not a target variable", v)));
            };
            let r = t.subst(&m);
            match check_sorts(&r, &self.sig, &with_metas(&r, env)) {
                Ok(s) if s == *sort => {}
                Ok(s) => return Err(CountError::Witness(format!("`{}` gets sort {}, expected {}", v, s, sort))),
                Err(e) => return Err(CountError::Witness(format!("`{}`: {}", v, e))),
            }
            if out.insert(v.clone(), r).is_some() {
                return Err(CountError::Witness(format!("`{}` given twice", v)));
            }
        }
        if let Some((v, _)) = targets.iter().find(|(v, _)| !out.contains_key(v)) {
            return Err(CountError::Witness(format!("no value for `{}`", v)));
        }
        Ok(out)
    }

    fn label(&self, rule: &str, name: &str) -> String {
        let mut parts = vec![];
        if !self.opts.prefix.is_empty() {
            parts.push(self.opts.prefix.as_str());
        }
        if !self.step.is_empty() {
            parts.push(self.step.as_str());
        }
        parts.push(rule);
        parts.push(name);
        parts.join("/")
    }

    fn to_smt(&self, t: &Term) -> Term {
        match t {
            Term::App(f, args) if self.decls.contains_key(f) => {
                Term::app(format!("{}{}", COUNT_PREFIX, f), args.iter().map(|a| self.to_smt(a)).collect())
            }
            _ => t.map_children(&mut |c| self.to_smt(c)),
        }
    }

    /// Ground instances of the recursive definitions for every application
    /// outside quantifiers: one step up and one step down.
    fn unfoldings(&self, ts: &[Term]) -> Vec<Term> {
        fn collect(t: &Term, recs: &BTreeMap<String, RecFun>, out: &mut BTreeSet<(String, Term)>) {
            if let Term::Quant { .. } = t {
                return;
            }
            if let Term::App(f, args) = t {
                if recs.contains_key(f) && args.len() == 1 {
                    out.insert((f.clone(), args[0].clone()));
                }
            }
            for c in t.children() {
                collect(c, recs, out);
            }
        }
        let mut apps = BTreeSet::new();
        for t in ts {
            collect(t, &self.recs, &mut apps);
        }
        let mut out = vec![];
        let mut based = BTreeSet::new();
        for (f, a) in apps {
            let r = &self.recs[&f];
            let b = Term::int(r.base_index);
            let call = |x: Term| Term::app(f.clone(), vec![x]);
            if based.insert(f.clone()) {
                out.push(Term::eq(call(b.clone()), r.base_value.clone()));
            }
            // A literal argument close to the base unfolds all the way down.
            if let Some(k) = a.as_int().and_then(|k| i64::try_from(k).ok()) {
                if (r.base_index..=r.base_index + UNFOLD_LIMIT).contains(&k) {
                    for j in r.base_index..k {
                        out.push(Term::eq(call(Term::int(j + 1)), r.unfold(&Term::int(j), &call(Term::int(j)))));
                    }
                }
            }
            out.push(Term::implies(
                Term::ge(a.clone(), b.clone()),
                Term::eq(call(Term::add(a.clone(), Term::int(1))), r.unfold(&a, &call(a.clone()))),
            ));
            let below = Term::sub(a.clone(), Term::int(1));
            out.push(Term::implies(Term::gt(a.clone(), b), Term::eq(call(a.clone()), r.unfold(&below, &call(below.clone())))));
        }
        out
    }

    fn solve(
        &mut self,
        name: &str,
        rule: &str,
        expect: Expect,
        asserts: &[Term],
        env: &Env,
    ) -> Result<(String, Status, Option<Model>), CountError> {
        let label = self.label(rule, name);
        let mut q = Query::new(label.clone()).with_model();
        q.timeout_ms = self.opts.timeout_ms;
        let smt: Vec<Term> = asserts.iter().map(|t| self.to_smt(t)).collect();
        for t in smt.iter().cloned().chain(self.unfoldings(&smt)) {
            q.assert(t);
        }
        let mut used = BTreeSet::new();
        for a in &q.assertions {
            used.extend(a.applied_symbols());
        }
        for f in &used {
            if let Some(n) = f.strip_prefix(COUNT_PREFIX) {
                let arity = self.decls[n].params.len();
                q.declare_fun(f, vec![Sort::Int; arity], Sort::Int);
            } else if self.recs.contains_key(f) {
                q.declare_fun(f, vec![Sort::Int], Sort::Int);
            } else if let Some((args, ret)) = self.external.rank(f) {
                q.declare_fun(f, args.clone(), ret.clone());
            }
        }
        for s in &self.external.sorts {
            q.declare_sort(s);
        }
        let free: BTreeSet<Var> = q.assertions.iter().flat_map(|a| a.free_vars()).collect();
        for v in free {
            let s = env.get(&v).cloned().unwrap_or(Sort::Int);
            q.declare_const(&v, s);
        }
        let v = self.backend.solve(&q).map_err(|e| CountError::QueryUnknown { query: label.clone(), reason: e.to_string() })?;
        self.premises.push(PremiseResult { query: label.clone(), expect, status: v.status, time_ms: v.wall_time_ms });
        if v.status == Status::Unknown {
            let reason = v.reason.unwrap_or_else(|| "unknown".into());
            return Err(CountError::QueryUnknown { query: label, reason });
        }
        Ok((label, v.status, v.model))
    }

    fn valid(&mut self, rule: &str, name: &str, hyps: Vec<Term>, goal: Term, env: &Env) -> Result<String, CountError> {
        let mut a = hyps;
        a.push(Term::not(goal));
        match self.solve(name, rule, Expect::Valid, &a, env)? {
            (l, Status::Unsat, _) => Ok(l),
            (query, _, model) => Err(CountError::NotValid { query, model }),
        }
    }

    fn admit(&mut self, rule: &'static str, guard: Option<&Term>, relation: Term, premises: Vec<String>) -> CountFact {
        let f = CountFact { step: self.step.clone(), rule, guard: guard.cloned().unwrap_or(Term::tt()), relation, premises };
        self.facts.push(f.clone());
        f
    }

    fn guard_hyps(&self, guard: Option<&Term>) -> Result<Vec<Term>, CountError> {
        match guard {
            None => Ok(vec![]),
            Some(g) => {
                let env = with_metas(g, &Env::new());
                match check_sorts(g, &self.sig, &env) {
                    Ok(Sort::Bool) => Ok(vec![g.clone()]),
                    Ok(s) => Err(sort_err("guard", format!("sort {}", s))),
                    Err(e) => Err(sort_err("guard", e)),
                }
            }
        }
    }

    fn same_vars(&self, apps: &[&CountApp]) -> Result<(), CountError> {
        let first = &self.lookup(apps[0])?.vars;
        for a in &apps[1..] {
            let v = &self.lookup(a)?.vars;
            let (x, y): (BTreeMap<_, _>, BTreeMap<_, _>) = (first.iter().cloned().collect(), v.iter().cloned().collect());
            if x != y {
                return Err(CountError::VarsMismatch(format!("{} and {}", apps[0].name, a.name)));
            }
        }
        Ok(())
    }

    pub fn positive(&mut self, app: &CountApp, guard: Option<&Term>) -> Result<CountFact, CountError> {
        self.lookup(app)?;
        self.guard_hyps(guard)?;
        Ok(self.admit("positive", guard, Term::ge(app.term(), Term::int(0)), vec![]))
    }

    pub fn range(&mut self, app: &CountApp, guard: Option<&Term>) -> Result<CountFact, CountError> {
        let d = self.lookup(app)?.clone();
        self.guard_hyps(guard)?;
        let not_range = || CountError::NotRange(app.term().to_string());
        let [(x, Sort::Int)] = d.vars.as_slice() else {
            return Err(not_range());
        };
        let mut env = Env::new();
        let f = self.inst(app, &Self::copy(&d, 1, &mut env))?;
        let xv = Term::var(copy_var(x, 1));
        let mentions = |t: &Term| t.free_vars().contains(&copy_var(x, 1));
        let (mut lo, mut hi) = (None, None);
        if let Term::And(cs) = &f {
            for c in cs {
                match c {
                    Term::Cmp(CmpOp::Le, a, v) if **v == xv && !mentions(a) => lo = Some((**a).clone()),
                    Term::Cmp(CmpOp::Lt, v, b) if **v == xv && !mentions(b) => hi = Some((**b).clone()),
                    _ => return Err(not_range()),
                }
            }
        }
        let (Some(a), Some(b)) = (lo, hi) else {
            return Err(not_range());
        };
        let width = Term::sub(b, a);
        let size = Term::ite(Term::ge(width.clone(), Term::int(0)), width, Term::int(0));
        Ok(self.admit("range", guard, Term::eq(app.term(), size), vec![]))
    }

    fn copies(&self, app: &CountApp, c: u64, env: &mut Env) -> Result<Vec<Term>, CountError> {
        let d = self.lookup(app)?.clone();
        let maps: Vec<_> = (1..=c as u32).map(|k| Self::copy(&d, k, env)).collect();
        let mut a = Vec::new();
        for m in &maps {
            a.push(self.inst(app, m)?);
        }
        for i in 0..maps.len() {
            for j in i + 1..maps.len() {
                a.push(differ(&maps[i], &maps[j]));
            }
        }
        Ok(a)
    }

    pub fn const_lb(&mut self, app: &CountApp, c: u64, models: Option<&[ExplicitModel]>) -> Result<CountFact, CountError> {
        let d = self.lookup(app)?.clone();
        let mut env = Env::new();
        let one = self.inst(app, &Self::copy(&d, 1, &mut env))?;
        if one.free_vars().iter().any(|v| v.tag == Tag::Plain) {
            return Err(CountError::NotGround(app.term().to_string()));
        }
        let a = self.copies(app, c, &mut env)?;
        if let Some(ms) = models {
            // Pinning every copy to a given model turns the search into a check.
            if ms.len() as u64 != c {
                return Err(CountError::Witness(format!("const-lb {} needs {} models, found {}", c, c, ms.len())));
            }
            let mut defs = vec![];
            for (k, m) in ms.iter().enumerate() {
                defs.extend(self.pin(&d, k as u32 + 1, m)?);
            }
            let l = self.valid("const-lb", "models", defs, Term::and(a), &env)?;
            return Ok(self.admit("const-lb", None, Term::ge(app.term(), Term::int(c)), vec![l]));
        }
        match self.solve("models", "const-lb", Expect::Sat, &a, &env)? {
            (l, Status::Sat, _) => Ok(self.admit("const-lb", None, Term::ge(app.term(), Term::int(c)), vec![l])),
            (query, _, _) => Err(CountError::NotSat { query }),
        }
    }

    /// Equations fixing copy `k` of the counted variables to `m`.
    fn pin(&self, d: &CountDecl, k: u32, m: &ExplicitModel) -> Result<Vec<Term>, CountError> {
        let mut out = vec![];
        for (v, sort) in &d.vars {
            let mut it = m.iter().filter(|(n, _)| n == v);
            let (Some((_, val)), None) = (it.next(), it.next()) else {
                return Err(CountError::Witness(format!("model {} must give `{}` exactly once", k, v)));
            };
            let x = Term::var(copy_var(v, k));
            let eq = match (val, sort) {
                (ModelValue::Term(t), _) => {
                    match check_sorts(t, &self.sig, &Env::new()) {
                        Ok(s) if s == *sort => {}
                        Ok(s) => return Err(CountError::Witness(format!("`{}` gets sort {}, expected {}", v, s, sort))),
                        Err(e) => return Err(CountError::Witness(format!("`{}`: {}", v, e))),
                    }
                    Term::eq(x, t.clone())
                }
                (ModelValue::Lambda(j, js, body), Sort::Array(i, e)) if **i == *js => {
                    let mut benv = Env::new();
                    benv.insert(Var::plain(j.clone()), js.clone());
                    match check_sorts(body, &self.sig, &benv) {
                        Ok(s) if s == **e => {}
                        _ => return Err(CountError::Witness(format!("lambda for `{}` is ill-sorted", v))),
                    }
                    let jv = Term::var(Var::plain(j.clone()));
                    Term::forall(vec![(j.clone(), js.clone())], Term::eq(Term::select(x, jv), body.clone()))
                }
                _ => return Err(CountError::Witness(format!("lambda for non-array `{}`", v))),
            };
            out.push(eq);
        }
        if let Some((v, _)) = m.iter().find(|(n, _)| d.var_sort(n).is_none()) {
            return Err(CountError::Witness(format!("`{}` is not counted by {}", v, d.name)));
        }
        Ok(out)
    }

    pub fn const_ub(&mut self, app: &CountApp, c: u64, guard: Option<&Term>) -> Result<CountFact, CountError> {
        let mut a = self.guard_hyps(guard)?;
        let mut env = Env::new();
        a.extend(self.copies(app, c, &mut env)?);
        match self.solve("no-models", "const-ub", Expect::Unsat, &a, &env)? {
            (l, Status::Unsat, _) => Ok(self.admit("const-ub", guard, Term::le(app.term(), Term::int(c as i64 - 1)), vec![l])),
            (query, _, model) => Err(CountError::NotValid { query, model }),
        }
    }

    pub fn ub(&mut self, f: &CountApp, g: &CountApp, guard: Option<&Term>) -> Result<CountFact, CountError> {
        self.same_vars(&[f, g])?;
        let hyps = self.guard_hyps(guard)?;
        let mut env = Env::new();
        let x = Self::copy(self.lookup(f)?, 1, &mut env);
        let (fx, gx) = (self.inst(f, &x)?, self.inst(g, &x)?);
        let mut h = hyps;
        h.push(fx);
        let l = self.valid("ub", "implication", h, gx, &env)?;
        Ok(self.admit("ub", guard, Term::le(f.term(), g.term()), vec![l]))
    }

    pub fn or(
        &mut self,
        f: &CountApp,
        g: &CountApp,
        h: &CountApp,
        gh: &CountApp,
        guard: Option<&Term>,
    ) -> Result<CountFact, CountError> {
        self.same_vars(&[f, g, h, gh])?;
        let hyps = self.guard_hyps(guard)?;
        let mut env = Env::new();
        let x = Self::copy(self.lookup(f)?, 1, &mut env);
        let [fx, gx, hx, ghx] = [f, g, h, gh].map(|a| self.inst(a, &x));
        let (fx, gx, hx, ghx) = (fx?, gx?, hx?, ghx?);
        let l1 = self.valid("or", "cover", hyps.clone(), Term::iff(fx, Term::or(vec![gx.clone(), hx.clone()])), &env)?;
        let l2 = self.valid("or", "overlap", hyps, Term::iff(ghx, Term::and(vec![gx, hx])), &env)?;
        let rel = Term::eq(f.term(), Term::sub(Term::add(g.term(), h.term()), gh.term()));
        Ok(self.admit("or", guard, rel, vec![l1, l2]))
    }

    fn product(
        &mut self,
        rule: &'static str,
        h: &CountApp,
        f: &CountApp,
        g: &CountApp,
        guard: Option<&Term>,
    ) -> Result<CountFact, CountError> {
        let (dh, df, dg) = (self.lookup(h)?.clone(), self.lookup(f)?.clone(), self.lookup(g)?.clone());
        let mut union: BTreeMap<String, Sort> = df.vars.iter().cloned().collect();
        let mut overlap = vec![];
        for (v, s) in &dg.vars {
            match union.get(v) {
                Some(t) if t != s => return Err(CountError::VarsMismatch(format!("`{}` has two sorts", v))),
                Some(_) => overlap.push(v.clone()),
                None => {
                    union.insert(v.clone(), s.clone());
                }
            }
        }
        if rule == "disjoint" && !overlap.is_empty() {
            return Err(CountError::VarsOverlap(overlap));
        }
        if dh.vars.iter().cloned().collect::<BTreeMap<_, _>>() != union {
            return Err(CountError::VarsMismatch(format!("{} must count the variables of {} and {}", h.name, f.name, g.name)));
        }
        let hyps = self.guard_hyps(guard)?;
        let mut env = Env::new();
        let x = Self::copy(&dh, 1, &mut env);
        let sub = |d: &CountDecl| -> BTreeMap<String, Term> { d.vars.iter().map(|(v, _)| (v.clone(), x[v].clone())).collect() };
        let (hx, fx, gx) = (self.inst(h, &x)?, self.inst(f, &sub(&df))?, self.inst(g, &sub(&dg))?);
        let l = self.valid(rule, "decomposition", hyps, Term::iff(hx, Term::and(vec![fx, gx])), &env)?;
        let prod = Term::mul(f.term(), g.term());
        let rel = if rule == "disjoint" { Term::eq(h.term(), prod) } else { Term::le(h.term(), prod) };
        Ok(self.admit(rule, guard, rel, vec![l]))
    }

    pub fn and_ub(&mut self, h: &CountApp, f: &CountApp, g: &CountApp, guard: Option<&Term>) -> Result<CountFact, CountError> {
        self.product("and-ub", h, f, g, guard)
    }

    pub fn disjoint(&mut self, h: &CountApp, f: &CountApp, g: &CountApp, guard: Option<&Term>) -> Result<CountFact, CountError> {
        self.product("disjoint", h, f, g, guard)
    }

    pub fn injectivity(
        &mut self,
        f: &CountApp,
        g: &CountApp,
        w: &Witness,
        guard: Option<&Term>,
    ) -> Result<CountFact, CountError> {
        let (df, dg) = (self.lookup(f)?.clone(), self.lookup(g)?.clone());
        let hyps = self.guard_hyps(guard)?;
        let mut env = Env::new();
        let (x1, x2) = (Self::copy(&df, 1, &mut env), Self::copy(&df, 2, &mut env));
        let (w1, w2) = (self.resolve(w, &dg.vars, &x1, &env)?, self.resolve(w, &dg.vars, &x2, &env)?);
        let (f1, f2) = (self.inst(f, &x1)?, self.inst(f, &x2)?);
        let mut h = hyps.clone();
        h.push(f1.clone());
        let l1 = self.valid("injectivity", "maps-into", h, self.inst(g, &w1)?, &env)?;
        let mut h = hyps;
        h.extend([f1, f2, differ(&x1, &x2)]);
        let l2 = self.valid("injectivity", "injective", h, differ(&w1, &w2), &env)?;
        Ok(self.admit("injectivity", guard, Term::le(f.term(), g.term()), vec![l1, l2]))
    }

    pub fn ind_geq(
        &mut self,
        f: &CountApp,
        g: &CountApp,
        n: &str,
        w: &Witness,
        guard: Option<&Term>,
    ) -> Result<CountFact, CountError> {
        let (df, dg) = (self.lookup(f)?.clone(), self.lookup(g)?.clone());
        let overlap: Vec<String> = df.vars.iter().filter(|(v, _)| dg.var_sort(v).is_some()).map(|(v, _)| v.clone()).collect();
        if !overlap.is_empty() {
            return Err(CountError::VarsOverlap(overlap));
        }
        let hyps = self.guard_hyps(guard)?;
        let f_next = f.subst(&[(Var::plain(n), next(n))].into_iter().collect());
        let mut env = Env::new();
        let mut side = vec![];
        for k in 1..=2 {
            let x = Self::copy(&df, k, &mut env);
            let y = Self::copy(&dg, k, &mut env);
            let scope: BTreeMap<String, Term> = x.iter().chain(&y).map(|(a, b)| (a.clone(), b.clone())).collect();
            let lifted = self.resolve(w, &df.vars, &scope, &env)?;
            let (fx, gy) = (self.inst(f, &x)?, self.inst(g, &y)?);
            side.push((x, y, lifted, fx, gy));
        }
        let (x1, y1, g1, f1, gy1) = side[0].clone();
        let (x2, y2, g2, f2, gy2) = side[1].clone();
        let mut h = hyps.clone();
        h.extend([f1.clone(), gy1.clone()]);
        let l1 = self.valid("ind-geq", "lift", h, self.inst(&f_next, &g1)?, &env)?;
        let mut h = hyps;
        h.extend([f1, gy1, f2, gy2, Term::or(vec![differ(&x1, &x2), differ(&y1, &y2)])]);
        let l2 = self.valid("ind-geq", "injective", h, differ(&g1, &g2), &env)?;
        let rel = Term::ge(f_next.term(), Term::mul(f.term(), g.term()));
        Ok(self.admit("ind-geq", guard, rel, vec![l1, l2]))
    }

    pub fn ind_leq(
        &mut self,
        f: &CountApp,
        g: &CountApp,
        n: &str,
        hx: &Witness,
        hy: &Witness,
        guard: Option<&Term>,
    ) -> Result<CountFact, CountError> {
        let (df, dg) = (self.lookup(f)?.clone(), self.lookup(g)?.clone());
        let hyps = self.guard_hyps(guard)?;
        let f_next = f.subst(&[(Var::plain(n), next(n))].into_iter().collect());
        let mut env = Env::new();
        let x1 = Self::copy(&df, 1, &mut env);
        let x2 = Self::copy(&df, 2, &mut env);
        let (hx1, hx2) = (self.resolve(hx, &df.vars, &x1, &env)?, self.resolve(hx, &df.vars, &x2, &env)?);
        let (hy1, hy2) = (self.resolve(hy, &dg.vars, &x1, &env)?, self.resolve(hy, &dg.vars, &x2, &env)?);
        let (n1, n2) = (self.inst(&f_next, &x1)?, self.inst(&f_next, &x2)?);
        let mut h = hyps.clone();
        h.push(n1.clone());
        let lowered = Term::and(vec![self.inst(f, &hx1)?, self.inst(g, &hy1)?]);
        let l1 = self.valid("ind-leq", "lower", h, lowered, &env)?;
        let mut h = hyps;
        h.extend([n1, n2, differ(&x1, &x2)]);
        let l2 = self.valid("ind-leq", "injective", h, Term::or(vec![differ(&hx1, &hx2), differ(&hy1, &hy2)]), &env)?;
        let rel = Term::le(f_next.term(), Term::mul(f.term(), g.term()));
        Ok(self.admit("ind-leq", guard, rel, vec![l1, l2]))
    }

    /// Ground instances of the selected facts: each fact with its
    /// parameters left free (so they meet same-named parameters of the
    /// query), and each single-parameter fact again at every `points` term.
    /// Instances of admitted facts are sound hypotheses, and keeping them
    /// quantifier-free lets the solver answer sat instead of giving up.
    fn fact_instances(&self, using: Option<&[String]>, points: &[Term]) -> Result<Vec<Term>, CountError> {
        if let Some(ls) = using {
            for l in ls {
                if !self.facts.iter().any(|f| &f.step == l) {
                    return Err(CountError::UnknownStep(l.clone()));
                }
            }
        }
        let mut out = vec![];
        for f in self.facts.iter().filter(|f| using.is_none_or(|ls| ls.contains(&f.step))) {
            let body = match &f.guard {
                Term::Bool(true) => f.relation.clone(),
                g => Term::implies(g.clone(), f.relation.clone()),
            };
            let metas = f.metas();
            if metas.len() == 1 {
                let m = metas.into_iter().next().unwrap();
                for p in points {
                    let t = body.subst(&BTreeMap::from([(m.clone(), p.clone())]));
                    if !out.contains(&t) {
                        out.push(t);
                    }
                }
            }
            if !out.contains(&body) {
                out.push(body);
            }
        }
        Ok(out)
    }

    /// Induction on `n` from `base`: the closed form meets the admitted
    /// facts at the base index and is preserved by one step.
    pub fn close_recurrence(
        &mut self,
        c: &CountApp,
        rel: CmpOp,
        closed: &Term,
        n: &str,
        base: i64,
        using: Option<&[String]>,
    ) -> Result<CountFact, CountError> {
        self.lookup(c)?;
        self.relation_symbols(closed)?;
        let cur = Term::cmp(rel, c.term(), closed.clone());
        let env = Env::new();
        let at_base = subst_n(&cur, n, Term::int(base));
        let facts = self.fact_instances(using, &[Term::int(base)])?;
        let l1 = self.valid("close-recurrence", "base", facts, at_base, &env).map_err(|e| match e {
            CountError::NotValid { query, model } => CountError::BaseMismatch { query, model },
            e => e,
        })?;
        let mut h = self.fact_instances(using, &[Term::var(Var::plain(n)), next(n)])?;
        h.push(Term::ge(Term::var(Var::plain(n)), Term::int(base)));
        h.push(cur.clone());
        let l2 = self.valid("close-recurrence", "step", h, subst_n(&cur, n, next(n)), &env).map_err(|e| match e {
            CountError::NotValid { query, model } => CountError::StepMismatch { query, model },
            e => e,
        })?;
        let guard = Term::ge(Term::var(Var::plain(n)), Term::int(base));
        Ok(self.admit("close-recurrence", Some(&guard), cur, vec![l1, l2]))
    }

    /// Final entailment from ground instances of every admitted fact, at
    /// the arguments of the counts the claim mentions.
    pub fn goal(&mut self, claim: &Term, guard: Option<&Term>) -> Result<String, CountError> {
        self.relation_symbols(claim)?;
        let mut points = vec![];
        claim.walk(&mut |t| {
            if let Term::App(f, args) = t {
                if self.decls.contains_key(f) && args.len() == 1 && !points.contains(&args[0]) {
                    points.push(args[0].clone());
                }
            }
        });
        let mut h = self.fact_instances(None, &points)?;
        h.extend(self.guard_hyps(guard)?);
        self.valid("goal", "entailment", h, claim.clone(), &Env::new()).map_err(|e| match e {
            CountError::NotValid { query, model } => CountError::GoalNotEntailed { query, model },
            e => e,
        })
    }

    pub fn apply(&mut self, step: &str, r: &RuleApp) -> Result<CountFact, CountError> {
        self.step = step.to_string();
        let g = r.guard.as_ref();
        match &r.rule {
            Rule::Range(a) => self.range(a, g),
            Rule::Positive(a) => self.positive(a, g),
            Rule::ConstLb { app, c, models } => self.const_lb(app, *c, models.as_deref()),
            Rule::ConstUb(a, c) => self.const_ub(a, *c, g),
            Rule::Ub { f, g: gg } => self.ub(f, gg, g),
            Rule::Or { f, g: gg, h, gh } => self.or(f, gg, h, gh, g),
            Rule::AndUb { h, f, g: gg } => self.and_ub(h, f, gg, g),
            Rule::Disjoint { h, f, g: gg } => self.disjoint(h, f, gg, g),
            Rule::Injectivity { f, g: gg, witness } => self.injectivity(f, gg, witness, g),
            Rule::IndGeq { f, g: gg, n, witness } => self.ind_geq(f, gg, n, witness, g),
            Rule::IndLeq { f, g: gg, n, hx, hy } => self.ind_leq(f, gg, n, hx, hy, g),
            Rule::CloseRecurrence { c, rel, closed, n, base, using } => {
                self.close_recurrence(c, *rel, closed, n, *base, using.as_deref())
            }
        }
    }

    /// Make `sig`'s functions and sorts available to [`Kernel::entails`].
    /// Counts and recursive functions keep their own meaning.
    pub fn declare_external(&mut self, sig: &Signature) {
        self.external = sig.clone();
    }

    /// Decide `hyps ⇒ goal`, where count applications denote counts and
    /// recursive functions are unfolded as in rule premises. Nothing is
    /// admitted. Returns the query label.
    pub fn entails(&mut self, name: &str, hyps: Vec<Term>, goal: Term, env: &BTreeMap<Var, Sort>) -> Result<String, CountError> {
        self.valid("entails", name, hyps, goal, env)
    }

    pub fn set_step(&mut self, step: &str) {
        self.step = step.to_string();
    }
}

/// `env` plus every other plain variable of `t` as an integer parameter.
fn with_metas(t: &Term, env: &Env) -> Env {
    let mut e = env.clone();
    for v in t.free_vars() {
        if v.tag == Tag::Plain {
            e.entry(v).or_insert(Sort::Int);
        }
    }
    e
}
