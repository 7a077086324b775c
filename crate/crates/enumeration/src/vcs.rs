use std::collections::{BTreeMap, BTreeSet};

use qhl::QhpProperty;
use term_core::{check_sorts, rename_free, Signature, Sort, Tag, Term, Var};
use transition_system::{prime_state, TransitionSystem};

use crate::witness::{Def, EnumerationWitness};
use crate::EnumError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BundleKind {
    Injective,
    Surjective,
}

impl BundleKind {
    pub fn name(self) -> &'static str {
        match self {
            BundleKind::Injective => "injective",
            BundleKind::Surjective => "surjective",
        }
    }
}

/// One closed validity check: `⋀ hyps ⇒ goal` over `env`.
#[derive(Clone, Debug, PartialEq)]
pub struct Obligation {
    pub label: String,
    pub hyps: Vec<Term>,
    pub goal: Term,
    pub env: BTreeMap<Var, Sort>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VcBundle {
    pub kind: BundleKind,
    pub obligations: Vec<Obligation>,
    pub sig: Signature,
    pub options: Vec<(String, String)>,
}

struct Ctx<'a> {
    sys: &'a TransitionSystem,
    prop: &'a QhpProperty,
    w: &'a EnumerationWitness,
    xs: BTreeSet<String>,
    ys: BTreeSet<String>,
}

impl<'a> Ctx<'a> {
    fn new(sys: &'a TransitionSystem, prop: &'a QhpProperty, w: &'a EnumerationWitness) -> Result<Ctx<'a>, EnumError> {
        let xs: BTreeSet<String> = sys.var_names().into_iter().collect();
        let mut ys = BTreeSet::new();
        for (y, _) in &w.enum_vars {
            if xs.contains(y) || !ys.insert(y.clone()) {
                return Err(EnumError::Syntax(format!("enumeration variable `{}` clashes with another name", y)));
            }
        }
        if let Some((d, _)) = &w.diff_index {
            if xs.contains(d) || ys.contains(d) {
                return Err(EnumError::Syntax(format!("difference index `{}` clashes with another name", d)));
            }
        }
        Ok(Ctx { sys, prop, w, xs, ys })
    }

    /// Move state copies through `copies` (old index → new index) and plain
    /// enumeration variables to `ytag`.
    fn relabel(&self, t: &Term, copies: &[(u32, u32)], ytag: Tag) -> Term {
        let cmap = |i: u32| copies.iter().find(|(a, _)| *a == i).map(|(_, b)| *b).unwrap_or(i);
        rename_free(t, &|v| {
            if self.ys.contains(&v.base) && v.tag == Tag::Plain {
                return Some(v.with_tag(ytag));
            }
            if !self.xs.contains(&v.base) {
                return None;
            }
            match v.tag {
                Tag::Indexed(i) => Some(v.with_tag(Tag::Indexed(cmap(i)))),
                Tag::IndexedPrimed(i) => Some(v.with_tag(Tag::IndexedPrimed(cmap(i)))),
                _ => None,
            }
        })
    }

    fn valid(&self, ytag: Tag) -> Term {
        let zs: BTreeSet<&String> = self.sys.params.iter().collect();
        rename_free(&self.w.valid, &|v| {
            if v.tag != Tag::Plain {
                None
            } else if self.ys.contains(&v.base) {
                Some(v.with_tag(ytag))
            } else if zs.contains(&v.base) {
                Some(v.with_tag(Tag::Indexed(1)))
            } else {
                None
            }
        })
    }

    fn trel(&self, ytag: Tag, a: u32, b: u32) -> Term {
        self.relabel(&self.w.trel, &[(1, a), (2, b)], ytag)
    }

    fn psi(&self, a: u32, b: u32) -> Result<Term, EnumError> {
        self.prop.psi_on(a, b).map_err(|e| EnumError::Property(e.to_string()))
    }

    fn delta(&self, a: u32, b: u32) -> Result<Term, EnumError> {
        self.prop.delta_on(a, b).map_err(|e| EnumError::Property(e.to_string()))
    }

    fn prime(&self, t: &Term, copies: &[u32]) -> Term {
        let state: BTreeSet<Var> = copies.iter().flat_map(|&c| self.sys.state_set(Tag::Indexed(c))).collect();
        prime_state(t, &state)
    }

    fn z_equal(&self, c: u32) -> Vec<Term> {
        self.sys
            .params
            .iter()
            .map(|z| Term::eq(Term::var(Var::new(z.clone(), Tag::Indexed(c))), Term::var(Var::new(z.clone(), Tag::Indexed(1)))))
            .collect()
    }

    fn env(&self, copies: &[u32], ytags: &[Tag]) -> BTreeMap<Var, Sort> {
        let mut env = BTreeMap::new();
        for &c in copies {
            env.extend(self.sys.env(Tag::Indexed(c)));
            env.extend(self.sys.env(Tag::IndexedPrimed(c)));
        }
        for &t in ytags {
            for (y, s) in &self.w.enum_vars {
                env.insert(Var::new(y.clone(), t), s.clone());
            }
        }
        env
    }

    fn obligation(&self, label: &str, hyps: Vec<Term>, goal: Term, env: BTreeMap<Var, Sort>) -> Result<Obligation, EnumError> {
        for t in hyps.iter().chain([&goal]) {
            check_sorts(t, &self.sys.sig, &env).map_err(|err| EnumError::Sort { label: label.into(), err })?;
        }
        Ok(Obligation { label: label.into(), hyps, goal, env })
    }

    /// Defining equations for `x@2!` in dependency order.
    fn successor_defs(&self) -> Result<Vec<Term>, EnumError> {
        let updates = self.sys.update_equations();
        let mut defs: BTreeMap<String, Def> = BTreeMap::new();
        for x in &self.xs {
            let d = match (self.w.successor.get(x), updates.get(x)) {
                (Some(d), _) => d.clone(),
                (None, Some(e)) => Def::Term(rename_free(e, &|v| {
                    if !self.xs.contains(&v.base) {
                        return None;
                    }
                    match v.tag {
                        Tag::Plain => Some(v.with_tag(Tag::Indexed(2))),
                        Tag::Primed => Some(v.with_tag(Tag::IndexedPrimed(2))),
                        _ => None,
                    }
                })),
                (None, None) => return Err(EnumError::MissingWitness(format!("successor of `{}`", x))),
            };
            defs.insert(x.clone(), d);
        }
        for k in self.w.successor.keys() {
            if !self.xs.contains(k) {
                return Err(EnumError::Syntax(format!("successor for unknown variable `{}`", k)));
            }
        }
        // Each definition may read successors defined before it.
        let deps = |d: &Def| -> BTreeSet<String> {
            d.body()
                .free_vars()
                .into_iter()
                .filter(|v| v.tag == Tag::IndexedPrimed(2) && self.xs.contains(&v.base))
                .map(|v| v.base)
                .collect()
        };
        let mut order = Vec::new();
        let mut done = BTreeSet::new();
        while done.len() < defs.len() {
            let ready: Vec<String> =
                defs.iter().filter(|(x, d)| !done.contains(*x) && deps(d).is_subset(&done)).map(|(x, _)| x.clone()).collect();
            if ready.is_empty() {
                let stuck: Vec<&String> = defs.keys().filter(|x| !done.contains(*x)).collect();
                return Err(EnumError::CyclicSuccessor(format!("{:?}", stuck)));
            }
            for x in ready {
                let target = Term::var(Var::new(x.clone(), Tag::IndexedPrimed(2)));
                order.push(defs[&x].equation(target));
                done.insert(x);
            }
        }
        Ok(order)
    }
}

fn not(t: Term) -> Term {
    Term::not(t)
}

/// Obligations for an injective trace enumeration (lower bounds).
pub fn gen_injective_vcs(sys: &TransitionSystem, prop: &QhpProperty, w: &EnumerationWitness) -> Result<VcBundle, EnumError> {
    let cx = Ctx::new(sys, prop, w)?;
    let plain = Tag::Plain;
    let mut out = Vec::new();

    // The enumerated trace stays related to the pivot forever.
    let mut j = vec![cx.valid(plain), cx.trel(plain, 1, 2)];
    j.extend(w.strengthen.iter().cloned());
    j.push(cx.psi(1, 2)?);
    j.extend(cx.z_equal(2));
    let j = Term::and(j);
    let env2 = cx.env(&[1, 2], &[plain]);

    let mut base_hyps = vec![sys.init_at(1), cx.valid(plain)];
    for x in &cx.xs {
        let d = w.skolem.get(x).ok_or_else(|| EnumError::MissingWitness(format!("initial value of `{}`", x)))?;
        base_hyps.push(d.equation(Term::var(Var::new(x.clone(), Tag::Indexed(2)))));
    }
    if let Some(k) = w.skolem.keys().find(|k| !cx.xs.contains(*k)) {
        return Err(EnumError::Syntax(format!("skolem for unknown variable `{}`", k)));
    }
    out.push(cx.obligation("existence-base", base_hyps, Term::and(vec![sys.init_at(2), j.clone()]), env2.clone())?);

    let succ = cx.successor_defs()?;
    let mut hyps = vec![j.clone(), sys.tx_at(1)];
    hyps.extend(succ.iter().cloned());
    out.push(cx.obligation("totality-of-witness", hyps.clone(), sys.tx_at(2), env2.clone())?);
    hyps.push(sys.tx_at(2));
    out.push(cx.obligation("existence-step", hyps, cx.prime(&j, &[1, 2]), env2)?);

    // Two different assignments give Δ-different traces.
    let (ya, yb) = (Tag::Indexed(2), Tag::Indexed(3));
    let (va, vb) = (cx.valid(ya), cx.valid(yb));
    let ydiff = Term::or(
        w.enum_vars
            .iter()
            .map(|(y, _)| Term::ne(Term::var(Var::new(y.clone(), ya)), Term::var(Var::new(y.clone(), yb))))
            .collect(),
    );
    let mut env3 = cx.env(&[1, 2, 3], &[ya, yb]);
    let sep = match &w.diff_index {
        Some((d, cond)) => {
            let goal = Term::exists(vec![(d.clone(), Sort::Int)], cond.clone());
            let hyps = vec![va.clone(), vb.clone(), ydiff.clone()];
            out.push(cx.obligation("distinctness/diff-exists", hyps, goal, cx.env(&[1], &[ya, yb]))?);
            env3.insert(Var::plain(d.clone()), Sort::Int);
            cond.clone()
        }
        None => ydiff,
    };
    let rel = [va, vb, sep, cx.trel(ya, 1, 2), cx.trel(yb, 1, 3)];
    let mut hyps = vec![sys.init_at(1), sys.init_at(2), sys.init_at(3)];
    hyps.extend(cx.z_equal(2));
    hyps.extend(cx.z_equal(3));
    hyps.extend(rel.iter().cloned());
    let dstr = Term::and(w.distinct_strengthen.clone());
    let delta = cx.delta(2, 3)?;
    match &w.rank {
        None => {
            out.push(cx.obligation("distinctness/base", hyps, Term::and(vec![dstr, delta]), env3)?);
        }
        Some(r) => {
            let zero = Term::int(0);
            let goal = Term::and(vec![dstr.clone(), Term::or(vec![delta.clone(), Term::ge(r.clone(), zero.clone())])]);
            out.push(cx.obligation("distinctness/base", hyps, goal, env3.clone())?);
            let mut hyps = vec![dstr.clone(), not(delta.clone()), Term::ge(r.clone(), zero.clone())];
            hyps.extend(rel.iter().cloned());
            hyps.extend([sys.tx_at(1), sys.tx_at(2), sys.tx_at(3)]);
            hyps.extend(rel.iter().skip(3).map(|t| cx.prime(t, &[1, 2, 3])));
            let r1 = cx.prime(r, &[1, 2, 3]);
            let goal = Term::and(vec![
                cx.prime(&dstr, &[1, 2, 3]),
                Term::or(vec![
                    cx.prime(&delta, &[1, 2, 3]),
                    Term::and(vec![Term::ge(r1.clone(), zero), Term::lt(r1, r.clone())]),
                ]),
            ]);
            out.push(cx.obligation("distinctness/step", hyps, goal, env3)?);
        }
    }
    Ok(VcBundle { kind: BundleKind::Injective, obligations: out, sig: sys.sig.clone(), options: w.options.clone() })
}

/// Obligations for a surjective trace enumeration (upper bounds).
pub fn gen_surjective_vcs(sys: &TransitionSystem, prop: &QhpProperty, w: &EnumerationWitness) -> Result<VcBundle, EnumError> {
    let cx = Ctx::new(sys, prop, w)?;
    let plain = Tag::Plain;
    let mut out = Vec::new();
    let psi12 = cx.psi(1, 2)?;

    // Every related pair is covered by the assignment read off its initial states.
    let mut k = vec![cx.valid(plain), cx.trel(plain, 1, 2)];
    k.extend(w.cover_strengthen.iter().cloned());
    let k = Term::and(k);
    let env2 = cx.env(&[1, 2], &[plain]);
    let mut hyps = vec![sys.init_at(1), sys.init_at(2), psi12.clone()];
    for (y, _) in &w.enum_vars {
        let d = w.cover.get(y).ok_or_else(|| EnumError::MissingWitness(format!("cover value of `{}`", y)))?;
        hyps.push(d.equation(Term::var(Var::plain(y.clone()))));
    }
    let mut goal = vec![k.clone()];
    goal.extend(cx.z_equal(2));
    out.push(cx.obligation("surj-cover-base", hyps, Term::and(goal), env2.clone())?);
    let hyps = vec![k.clone(), psi12.clone(), sys.tx_at(1), sys.tx_at(2), cx.prime(&psi12, &[1, 2])];
    out.push(cx.obligation("surj-cover-step", hyps, cx.prime(&k, &[1, 2]), env2)?);

    // Traces sharing an assignment are never Δ-different.
    let env3 = cx.env(&[1, 2, 3], &[plain]);
    let rel = [cx.trel(plain, 1, 2), cx.trel(plain, 1, 3), psi12, cx.psi(1, 3)?];
    let e = Term::and(w.surj_strengthen.clone());
    let same = not(cx.delta(2, 3)?);
    let mut hyps = vec![sys.init_at(1), sys.init_at(2), sys.init_at(3), cx.valid(plain)];
    hyps.extend(cx.z_equal(2));
    hyps.extend(cx.z_equal(3));
    hyps.extend(rel.iter().cloned());
    let inv = Term::and(vec![e, same]);
    out.push(cx.obligation("surj-distinct/base", hyps, inv.clone(), env3.clone())?);
    let mut hyps = vec![inv.clone(), cx.valid(plain)];
    hyps.extend(rel.iter().cloned());
    hyps.extend([sys.tx_at(1), sys.tx_at(2), sys.tx_at(3)]);
    hyps.extend(rel.iter().map(|t| cx.prime(t, &[1, 2, 3])));
    out.push(cx.obligation("surj-distinct/step", hyps, cx.prime(&inv, &[1, 2, 3]), env3)?);
    Ok(VcBundle { kind: BundleKind::Surjective, obligations: out, sig: sys.sig.clone(), options: w.options.clone() })
}
