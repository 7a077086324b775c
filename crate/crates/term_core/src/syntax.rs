use num_bigint::BigInt;
use thiserror::Error;

use crate::sexp::{parse_sexps, Sexp, SexpError};
use crate::sort::Sort;
use crate::term::{CmpOp, Quantifier, Term};
use crate::var::Var;

#[derive(Debug, Error, PartialEq)]
pub enum SyntaxError {
    #[error(transparent)]
    Sexp(#[from] SexpError),
    #[error("`{op}` expects {expected} argument(s), got {found}")]
    Arity { op: String, expected: String, found: usize },
    #[error("malformed {what}: {text}")]
    Malformed { what: &'static str, text: String },
    #[error("expected exactly one expression, found {0}")]
    NotSingle(usize),
}

fn malformed(what: &'static str, s: &Sexp) -> SyntaxError {
    SyntaxError::Malformed { what, text: s.to_string() }
}

pub fn parse_sort(s: &Sexp) -> Result<Sort, SyntaxError> {
    match s {
        Sexp::Atom(a) => Ok(match a.as_str() {
            "Bool" => Sort::Bool,
            "Int" => Sort::Int,
            _ if a.starts_with('"') => return Err(malformed("sort", s)),
            _ => Sort::Uninterpreted(a.clone()),
        }),
        Sexp::List(v) => match v.as_slice() {
            [h, i, e] if h.is_atom("Array") => Ok(Sort::array(parse_sort(i)?, parse_sort(e)?)),
            _ => Err(malformed("sort", s)),
        },
    }
}

pub fn sort_to_sexp(s: &Sort) -> Sexp {
    match s {
        Sort::Bool => Sexp::atom("Bool"),
        Sort::Int => Sexp::atom("Int"),
        Sort::Array(i, e) => Sexp::list(vec![Sexp::atom("Array"), sort_to_sexp(i), sort_to_sexp(e)]),
        Sort::Uninterpreted(n) => Sexp::atom(n.clone()),
    }
}

fn parse_numeral(a: &str) -> Option<BigInt> {
    let digits = a.strip_prefix('-').unwrap_or(a);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    a.parse().ok()
}

fn arity(op: &str, args: &[Sexp], ok: bool, expected: &str) -> Result<(), SyntaxError> {
    if ok {
        Ok(())
    } else {
        Err(SyntaxError::Arity { op: op.to_string(), expected: expected.to_string(), found: args.len() })
    }
}

fn bx(s: &Sexp) -> Result<Box<Term>, SyntaxError> {
    parse_term(s).map(Box::new)
}

fn parse_binder(s: &Sexp) -> Result<Vec<(String, Sort)>, SyntaxError> {
    let v = s.as_list().ok_or_else(|| malformed("binder list", s))?;
    let mut out: Vec<(String, Sort)> = Vec::new();
    for b in v {
        match b.as_list() {
            Some([n, so]) if n.as_atom().is_some() => {
                let name = n.as_atom().unwrap().to_string();
                if out.iter().any(|(x, _)| *x == name) {
                    return Err(malformed("binder list (duplicate name)", s));
                }
                out.push((name, parse_sort(so)?));
            }
            _ => return Err(malformed("binder", b)),
        }
    }
    if out.is_empty() {
        return Err(malformed("binder list (empty)", s));
    }
    Ok(out)
}

/// Split `(! body :pattern (..) ..)` into body and patterns.
fn parse_annotated(s: &Sexp) -> Result<(Term, Vec<Vec<Term>>), SyntaxError> {
    match s.as_list() {
        Some(v) if s.head() == Some("!") && v.len() >= 2 => {
            let body = parse_term(&v[1])?;
            let mut pats = Vec::new();
            let mut rest = &v[2..];
            while let [k, val, tail @ ..] = rest {
                match k.as_atom() {
                    Some(":pattern") => {
                        let ts = val.as_list().ok_or_else(|| malformed("pattern", val))?;
                        pats.push(ts.iter().map(parse_term).collect::<Result<_, _>>()?);
                    }
                    Some(a) if a.starts_with(':') => {}
                    _ => return Err(malformed("attribute", k)),
                }
                rest = tail;
            }
            if !rest.is_empty() {
                return Err(malformed("attribute list", s));
            }
            Ok((body, pats))
        }
        _ => Ok((parse_term(s)?, vec![])),
    }
}

pub fn parse_term(s: &Sexp) -> Result<Term, SyntaxError> {
    let v = match s {
        Sexp::Atom(a) => {
            return Ok(match a.as_str() {
                "true" => Term::Bool(true),
                "false" => Term::Bool(false),
                _ if a.starts_with('"') => return Err(malformed("term", s)),
                _ => match parse_numeral(a) {
                    Some(n) => Term::Int(n),
                    None => Term::Var(Var::from_symbol(a)),
                },
            })
        }
        Sexp::List(v) => v,
    };
    let head = match v.first() {
        Some(Sexp::Atom(h)) => h.as_str(),
        _ => return Err(malformed("application", s)),
    };
    let args = &v[1..];
    let n = args.len();
    let many = |args: &[Sexp]| args.iter().map(parse_term).collect::<Result<Vec<_>, _>>();
    let cmp = |op: CmpOp| -> Result<Term, SyntaxError> {
        arity(head, args, n == 2, "2")?;
        Ok(Term::Cmp(op, bx(&args[0])?, bx(&args[1])?))
    };
    Ok(match head {
        "+" => {
            arity(head, args, n >= 1, "at least 1")?;
            Term::Add(many(args)?)
        }
        "-" => {
            arity(head, args, n >= 1, "at least 1")?;
            if n == 1 {
                Term::neg(parse_term(&args[0])?)
            } else {
                Term::Sub(many(args)?)
            }
        }
        "*" => {
            arity(head, args, n >= 1, "at least 1")?;
            Term::Mul(many(args)?)
        }
        "div" => {
            arity(head, args, n == 2, "2")?;
            Term::Div(bx(&args[0])?, bx(&args[1])?)
        }
        "mod" => {
            arity(head, args, n == 2, "2")?;
            Term::Mod(bx(&args[0])?, bx(&args[1])?)
        }
        "=" => cmp(CmpOp::Eq)?,
        "distinct" if n > 2 => {
            let ts = many(args)?;
            let mut cs = Vec::new();
            for i in 0..ts.len() {
                for j in i + 1..ts.len() {
                    cs.push(Term::ne(ts[i].clone(), ts[j].clone()));
                }
            }
            Term::And(cs)
        }
        "distinct" => cmp(CmpOp::Ne)?,
        "<" => cmp(CmpOp::Lt)?,
        "<=" => cmp(CmpOp::Le)?,
        ">" => cmp(CmpOp::Gt)?,
        ">=" => cmp(CmpOp::Ge)?,
        "not" => {
            arity(head, args, n == 1, "1")?;
            Term::Not(bx(&args[0])?)
        }
        "and" => Term::And(many(args)?),
        "or" => Term::Or(many(args)?),
        "=>" => {
            arity(head, args, n >= 2, "at least 2")?;
            // Right-associative, as in SMT-LIB.
            let mut ts = many(args)?;
            let mut acc = ts.pop().unwrap();
            while let Some(t) = ts.pop() {
                acc = Term::implies(t, acc);
            }
            acc
        }
        "ite" => {
            arity(head, args, n == 3, "3")?;
            Term::Ite(bx(&args[0])?, bx(&args[1])?, bx(&args[2])?)
        }
        "select" => {
            arity(head, args, n == 2, "2")?;
            Term::Select(bx(&args[0])?, bx(&args[1])?)
        }
        "store" => {
            arity(head, args, n == 3, "3")?;
            Term::Store(bx(&args[0])?, bx(&args[1])?, bx(&args[2])?)
        }
        "forall" | "exists" => {
            arity(head, args, n == 2, "2")?;
            let vars = parse_binder(&args[0])?;
            let (body, patterns) = parse_annotated(&args[1])?;
            let q = if head == "forall" { Quantifier::Forall } else { Quantifier::Exists };
            Term::Quant { q, vars, body: Box::new(body), patterns }
        }
        "!" => parse_annotated(s)?.0,
        _ => Term::App(head.to_string(), many(args)?),
    })
}

/// Parse a single term from text.
pub fn parse_term_str(src: &str) -> Result<Term, SyntaxError> {
    let v = parse_sexps(src)?;
    match v.as_slice() {
        [s] => parse_term(s),
        _ => Err(SyntaxError::NotSingle(v.len())),
    }
}

pub fn parse_sort_str(src: &str) -> Result<Sort, SyntaxError> {
    let v = parse_sexps(src)?;
    match v.as_slice() {
        [s] => parse_sort(s),
        _ => Err(SyntaxError::NotSingle(v.len())),
    }
}

fn app(head: &str, args: impl IntoIterator<Item = Sexp>) -> Sexp {
    let mut v = vec![Sexp::atom(head)];
    v.extend(args);
    Sexp::List(v)
}

fn all(ts: &[Term]) -> Vec<Sexp> {
    ts.iter().map(term_to_sexp).collect()
}

pub fn term_to_sexp(t: &Term) -> Sexp {
    match t {
        Term::Var(v) => Sexp::atom(v.to_string()),
        Term::Int(n) if n.sign() == num_bigint::Sign::Minus => app("-", [Sexp::atom((-n).to_string())]),
        Term::Int(n) => Sexp::atom(n.to_string()),
        Term::Bool(b) => Sexp::atom(b.to_string()),
        Term::App(f, a) if a.is_empty() => Sexp::atom(f.clone()),
        Term::App(f, a) => app(f, all(a)),
        Term::Add(a) => app("+", all(a)),
        Term::Sub(a) => app("-", all(a)),
        Term::Neg(a) => app("-", [term_to_sexp(a)]),
        Term::Mul(a) => app("*", all(a)),
        Term::Div(a, b) => app("div", [term_to_sexp(a), term_to_sexp(b)]),
        Term::Mod(a, b) => app("mod", [term_to_sexp(a), term_to_sexp(b)]),
        Term::Cmp(op, a, b) => app(op.symbol(), [term_to_sexp(a), term_to_sexp(b)]),
        Term::Not(a) => app("not", [term_to_sexp(a)]),
        Term::And(a) => app("and", all(a)),
        Term::Or(a) => app("or", all(a)),
        Term::Implies(a, b) => app("=>", [term_to_sexp(a), term_to_sexp(b)]),
        Term::Ite(a, b, c) => app("ite", [term_to_sexp(a), term_to_sexp(b), term_to_sexp(c)]),
        Term::Select(a, b) => app("select", [term_to_sexp(a), term_to_sexp(b)]),
        Term::Store(a, b, c) => app("store", [term_to_sexp(a), term_to_sexp(b), term_to_sexp(c)]),
        Term::Quant { q, vars, body, patterns } => {
            let binder = Sexp::List(vars.iter().map(|(n, s)| Sexp::list(vec![Sexp::atom(n.clone()), sort_to_sexp(s)])).collect());
            let mut b = term_to_sexp(body);
            if !patterns.is_empty() {
                let mut v = vec![Sexp::atom("!"), b];
                for p in patterns {
                    v.push(Sexp::atom(":pattern"));
                    v.push(Sexp::List(all(p)));
                }
                b = Sexp::List(v);
            }
            let h = match q {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            };
            app(h, [binder, b])
        }
    }
}
