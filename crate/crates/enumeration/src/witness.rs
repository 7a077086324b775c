use std::collections::BTreeMap;

use term_core::{parse_sexps, parse_sort, parse_term, Sexp, Sort, Term, Var};

use crate::EnumError;

/// Right-hand side of a witness definition. `Lambda` describes an array
/// pointwise: `x = λj. body` means `∀j. x[j] = body`.
#[derive(Clone, Debug, PartialEq)]
pub enum Def {
    Term(Term),
    Lambda(Vec<(String, Sort)>, Term),
}

impl Def {
    /// The hypothesis `target = self`.
    pub fn equation(&self, target: Term) -> Term {
        match self {
            Def::Term(t) => Term::eq(target, t.clone()),
            Def::Lambda(vars, body) => {
                let lhs = vars.iter().fold(target, |a, (j, _)| Term::select(a, Term::var(Var::plain(j.clone()))));
                Term::forall(vars.clone(), Term::eq(lhs, body.clone()))
            }
        }
    }

    pub fn map(&self, f: &dyn Fn(&Term) -> Term) -> Def {
        match self {
            Def::Term(t) => Def::Term(f(t)),
            Def::Lambda(v, b) => Def::Lambda(v.clone(), f(b)),
        }
    }

    pub fn body(&self) -> &Term {
        match self {
            Def::Term(t) | Def::Lambda(_, t) => t,
        }
    }
}

/// Trace enumeration witness. Formulas name the pivot copy `x@1`, the
/// enumerated copy `x@2`, and in three-copy formulas also `x@3`.
/// Enumeration variables are plain (`e`) except in the distinctness
/// formulas, where the two assignments are `e@2` and `e@3`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationWitness {
    pub enum_vars: Vec<(String, Sort)>,
    pub valid: Term,
    pub trel: Term,
    pub skolem: BTreeMap<String, Def>,
    pub successor: BTreeMap<String, Def>,
    pub strengthen: Vec<Term>,
    pub diff_index: Option<(String, Term)>,
    pub rank: Option<Term>,
    pub distinct_strengthen: Vec<Term>,
    pub cover: BTreeMap<String, Def>,
    pub cover_strengthen: Vec<Term>,
    pub surj_strengthen: Vec<Term>,
    pub options: Vec<(String, String)>,
}

fn syn(msg: impl Into<String>) -> EnumError {
    EnumError::Syntax(msg.into())
}

fn term(s: &Sexp) -> Result<Term, EnumError> {
    parse_term(s).map_err(|e| syn(e.to_string()))
}

fn binders(s: &Sexp) -> Result<Vec<(String, Sort)>, EnumError> {
    let items = s.as_list().ok_or_else(|| syn(format!("expected binder list, got {}", s)))?;
    items
        .iter()
        .map(|b| match b.as_list() {
            Some([n, so]) if n.as_atom().is_some() => {
                Ok((n.as_atom().unwrap().to_string(), parse_sort(so).map_err(|e| syn(e.to_string()))?))
            }
            _ => Err(syn(format!("bad binder {}", b))),
        })
        .collect()
}

fn def(s: &Sexp) -> Result<Def, EnumError> {
    if s.head() == Some("lambda") {
        match s.as_list() {
            Some([_, vars, body]) => Ok(Def::Lambda(binders(vars)?, term(body)?)),
            _ => Err(syn(format!("bad lambda {}", s))),
        }
    } else {
        Ok(Def::Term(term(s)?))
    }
}

fn defs(args: &[Sexp], out: &mut BTreeMap<String, Def>) -> Result<(), EnumError> {
    for a in args {
        match a.as_list() {
            Some([n, d]) if n.as_atom().is_some() => {
                let name = n.as_atom().unwrap().to_string();
                if out.insert(name.clone(), def(d)?).is_some() {
                    return Err(syn(format!("`{}` defined twice", name)));
                }
            }
            _ => return Err(syn(format!("bad definition {}", a))),
        }
    }
    Ok(())
}

/// Parse an `(enumeration ...)` form.
pub fn parse_witness(s: &Sexp) -> Result<EnumerationWitness, EnumError> {
    let items = s.as_list().filter(|_| s.head() == Some("enumeration")).ok_or_else(|| syn("expected (enumeration ...)"))?;
    let mut w = EnumerationWitness {
        enum_vars: vec![],
        valid: Term::tt(),
        trel: Term::tt(),
        skolem: BTreeMap::new(),
        successor: BTreeMap::new(),
        strengthen: vec![],
        diff_index: None,
        rank: None,
        distinct_strengthen: vec![],
        cover: BTreeMap::new(),
        cover_strengthen: vec![],
        surj_strengthen: vec![],
        options: vec![],
    };
    let (mut valid, mut trel) = (None, None);
    for it in &items[1..] {
        let parts = it.as_list().ok_or_else(|| syn(format!("unexpected {}", it)))?;
        let args = &parts[1..];
        let one = || match args {
            [x] => term(x),
            _ => Err(syn(format!("{} takes one formula", it.head().unwrap_or("?")))),
        };
        match it.head() {
            Some("enum-vars") => w.enum_vars = binders(&Sexp::list(args.to_vec()))?,
            Some("valid") => valid = Some(one()?),
            Some("trel") => trel = Some(one()?),
            Some("skolem") => defs(args, &mut w.skolem)?,
            Some("successor") => defs(args, &mut w.successor)?,
            Some("cover") => defs(args, &mut w.cover)?,
            Some("strengthen") => w.strengthen.extend(args.iter().map(term).collect::<Result<Vec<_>, _>>()?),
            Some("distinct-strengthen") => w.distinct_strengthen.extend(args.iter().map(term).collect::<Result<Vec<_>, _>>()?),
            Some("cover-strengthen") => w.cover_strengthen.extend(args.iter().map(term).collect::<Result<Vec<_>, _>>()?),
            Some("surj-strengthen") => w.surj_strengthen.extend(args.iter().map(term).collect::<Result<Vec<_>, _>>()?),
            Some("rank") => w.rank = Some(one()?),
            Some("diff-index") => match args {
                [b, cond] => match binders(&Sexp::list(vec![b.clone()]))?.as_slice() {
                    [(d, Sort::Int)] => w.diff_index = Some((d.clone(), term(cond)?)),
                    _ => return Err(syn("diff-index binds one Int variable")),
                },
                _ => return Err(syn("expected (diff-index (d Int) condition)")),
            },
            Some("options") => {
                for o in args {
                    match o.as_list() {
                        Some([k, v]) if k.as_atom().is_some() && v.as_atom().is_some() => {
                            w.options.push((k.as_atom().unwrap().into(), v.as_atom().unwrap().into()))
                        }
                        _ => return Err(syn(format!("bad option {}", o))),
                    }
                }
            }
            _ => return Err(syn(format!("unexpected {}", it))),
        }
    }
    w.valid = valid.ok_or_else(|| syn("missing (valid ...)"))?;
    w.trel = trel.ok_or_else(|| syn("missing (trel ...)"))?;
    if w.enum_vars.is_empty() {
        return Err(syn("no enumeration variables"));
    }
    Ok(w)
}

pub fn parse_witness_str(src: &str) -> Result<EnumerationWitness, EnumError> {
    let v = parse_sexps(src).map_err(|e| syn(e.to_string()))?;
    match v.as_slice() {
        [s] => parse_witness(s),
        _ => Err(syn("expected exactly one (enumeration ...) form")),
    }
}
