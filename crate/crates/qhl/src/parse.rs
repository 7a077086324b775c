use term_core::{parse_sexps, parse_term, Sexp, Tag, Term};

use crate::ast::{Comparator, HyperLtl, QhlError, QhpProperty, StatePredicate};

fn syn(msg: impl Into<String>) -> QhlError {
    QhlError::Syntax(msg.into())
}

fn parse_pred(args: &[Sexp]) -> Result<StatePredicate, QhlError> {
    let [vars, body] = args else { return Err(syn("pred takes (trace vars) and a body")) };
    let vars: Vec<String> = vars
        .as_list()
        .ok_or_else(|| syn("pred trace list"))?
        .iter()
        .map(|a| a.as_atom().map(str::to_string).ok_or_else(|| syn("trace variable")))
        .collect::<Result<_, _>>()?;
    let body = parse_term(body).map_err(|e| syn(e.to_string()))?;
    let k = vars.len() as u32;
    for v in body.free_vars() {
        match v.tag {
            Tag::Indexed(i) if (1..=k).contains(&i) => {}
            _ => return Err(syn(format!("`{}` in a {}-ary predicate must be tagged @1..@{}", v, k, k))),
        }
    }
    Ok(StatePredicate { args: vars, body })
}

pub fn parse_hyperltl(s: &Sexp) -> Result<HyperLtl, QhlError> {
    if let Some(a) = s.as_atom() {
        return match a {
            "true" => Ok(HyperLtl::Const(true)),
            "false" => Ok(HyperLtl::Const(false)),
            _ => Err(syn(format!("unexpected `{}` in a HyperLTL body", a))),
        };
    }
    let v = s.as_list().unwrap();
    let args = &v[1..];
    let one = |name: &str| -> Result<Box<HyperLtl>, QhlError> {
        match args {
            [a] => Ok(Box::new(parse_hyperltl(a)?)),
            _ => Err(syn(format!("`{}` takes one argument", name))),
        }
    };
    let two = |name: &str| -> Result<(Box<HyperLtl>, Box<HyperLtl>), QhlError> {
        match args {
            [a, b] => Ok((Box::new(parse_hyperltl(a)?), Box::new(parse_hyperltl(b)?))),
            _ => Err(syn(format!("`{}` takes two arguments", name))),
        }
    };
    let many = || args.iter().map(parse_hyperltl).collect::<Result<Vec<_>, _>>();
    Ok(match s.head() {
        Some("pred") => HyperLtl::Pred(parse_pred(args)?),
        Some("not") => HyperLtl::Not(one("not")?),
        Some("and") => HyperLtl::And(many()?),
        Some("or") => HyperLtl::Or(many()?),
        Some("=>") => {
            let (a, b) = two("=>")?;
            HyperLtl::Implies(a, b)
        }
        Some("next") => HyperLtl::Next(one("next")?),
        Some("until") => {
            let (a, b) = two("until")?;
            HyperLtl::Until(a, b)
        }
        Some("finally") => HyperLtl::Finally(one("finally")?),
        Some("globally") => HyperLtl::Globally(one("globally")?),
        Some("count") | Some("forall") | Some("exists") => {
            return Err(syn("nested trace quantifiers are outside the supported template"))
        }
        _ => return Err(syn(format!("unexpected {}", s))),
    })
}

fn keyword_args(v: &[Sexp]) -> Result<Vec<(&str, &Sexp)>, QhlError> {
    let mut out = Vec::new();
    let mut rest = v;
    while let [k, val, tail @ ..] = rest {
        let k = k.as_atom().filter(|k| k.starts_with(':')).ok_or_else(|| syn(format!("expected keyword, got {}", k)))?;
        out.push((k, val));
        rest = tail;
    }
    if !rest.is_empty() {
        return Err(syn("dangling keyword"));
    }
    Ok(out)
}

/// `(qhp (forall t0) (count t1 :diff F :body G :cmp geq :bound N))`
pub fn parse_property(s: &Sexp) -> Result<QhpProperty, QhlError> {
    let v = s.as_list().filter(|_| s.head() == Some("qhp")).ok_or_else(|| syn("expected (qhp ...)"))?;
    let [_, fa, cnt] = v else { return Err(syn("qhp takes (forall ..) and (count ..)")) };
    let forall = match fa.as_list() {
        Some([h, t]) if h.is_atom("forall") && t.as_atom().is_some() => t.as_atom().unwrap().to_string(),
        _ => return Err(syn("expected (forall <trace>)")),
    };
    let cv = cnt.as_list().filter(|_| cnt.head() == Some("count")).ok_or_else(|| syn("expected (count ...)"))?;
    let count = cv.get(1).and_then(Sexp::as_atom).ok_or_else(|| syn("count needs a trace variable"))?.to_string();
    if count == forall {
        return Err(syn("counted trace variable must differ from the universal one"));
    }
    let (mut diff, mut body, mut cmp, mut bound) = (None, None, None, None);
    for (k, val) in keyword_args(&cv[2..])? {
        match k {
            ":diff" => diff = Some(parse_hyperltl(val)?),
            ":body" => body = Some(parse_hyperltl(val)?),
            ":cmp" => cmp = Some(val.as_atom().ok_or_else(|| syn("comparator"))?.to_string()),
            ":bound" => bound = Some(parse_term(val).map_err(|e| syn(e.to_string()))?),
            _ => return Err(syn(format!("unknown keyword {}", k))),
        }
    }
    let bound = bound.ok_or_else(|| syn("missing :bound"))?;
    let lit = |d: i64| match &bound {
        Term::Int(n) => Ok(Term::Int(n + d)),
        _ => Err(syn("strict comparators need a literal bound")),
    };
    let (cmp, bound) = match cmp.as_deref().ok_or_else(|| syn("missing :cmp"))? {
        "leq" => (Comparator::Le, bound),
        "eq" => (Comparator::Eq, bound),
        "geq" => (Comparator::Ge, bound),
        "lt" => (Comparator::Le, lit(-1)?),
        "gt" => (Comparator::Ge, lit(1)?),
        c => return Err(syn(format!("unknown comparator {}", c))),
    };
    let p = QhpProperty {
        forall,
        count,
        diff: diff.ok_or_else(|| syn("missing :diff"))?,
        body: body.ok_or_else(|| syn("missing :body"))?,
        cmp,
        bound,
    };
    for tv in p.body.trace_vars() {
        if tv != p.forall && tv != p.count {
            return Err(syn(format!("body mentions undeclared trace variable `{}`", tv)));
        }
    }
    for tv in p.diff.trace_vars() {
        if tv == p.forall || tv == p.count {
            return Err(syn(format!("difference formula must use its own trace variables, not `{}`", tv)));
        }
    }
    Ok(p)
}

pub fn parse_property_str(src: &str) -> Result<QhpProperty, QhlError> {
    let v = parse_sexps(src).map_err(|e| syn(e.to_string()))?;
    match v.as_slice() {
        [s] => parse_property(s),
        _ => Err(syn("expected exactly one (qhp ...) form")),
    }
}
