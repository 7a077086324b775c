use term_core::{parse_sexps, parse_sort, parse_term, Sexp, Signature};

use crate::system::{SystemError, TransitionSystem};

fn syn(msg: impl Into<String>) -> SystemError {
    SystemError::Syntax(msg.into())
}

/// `(system (name N)? (sorts S ..)? (functions (f (Int) Int) ..)? (vars (x Int) ..)
/// (params z ..) (init F) (tx F))`
pub fn parse_system(s: &Sexp) -> Result<TransitionSystem, SystemError> {
    let items = s.as_list().filter(|_| s.head() == Some("system")).ok_or_else(|| syn("expected (system ...)"))?;
    let mut name = String::from("system");
    let mut vars = Vec::new();
    let mut params = Vec::new();
    let mut init = None;
    let mut tx = None;
    let mut sig = Signature::new();
    let term = |x: &Sexp| parse_term(x).map_err(|e| syn(e.to_string()));
    for it in &items[1..] {
        let parts = it.as_list().ok_or_else(|| syn(format!("unexpected {}", it)))?;
        let args = &parts[1..];
        match it.head() {
            Some("name") => name = args.first().and_then(Sexp::as_atom).ok_or_else(|| syn("bad name"))?.to_string(),
            Some("sorts") => {
                for a in args {
                    sig.declare_sort(a.as_atom().ok_or_else(|| syn("bad sort name"))?);
                }
            }
            Some("functions") => {
                for f in args {
                    match f.as_list() {
                        Some([n, a, r]) => {
                            let a = a.as_list().ok_or_else(|| syn("bad argument sorts"))?;
                            let a = a.iter().map(parse_sort).collect::<Result<_, _>>().map_err(|e| syn(e.to_string()))?;
                            let r = parse_sort(r).map_err(|e| syn(e.to_string()))?;
                            sig.declare_fun(n.as_atom().ok_or_else(|| syn("bad function name"))?, a, r)
                                .map_err(|e| syn(e.to_string()))?;
                        }
                        _ => return Err(syn(format!("bad function declaration {}", f))),
                    }
                }
            }
            Some("vars") => {
                for v in args {
                    match v.as_list() {
                        Some([n, so]) if n.as_atom().is_some() => {
                            vars.push((n.as_atom().unwrap().to_string(), parse_sort(so).map_err(|e| syn(e.to_string()))?))
                        }
                        _ => return Err(syn(format!("bad variable declaration {}", v))),
                    }
                }
            }
            Some("params") => {
                for p in args {
                    params.push(p.as_atom().ok_or_else(|| syn("bad parameter"))?.to_string());
                }
            }
            Some("init") if args.len() == 1 => init = Some(term(&args[0])?),
            Some("tx") if args.len() == 1 => tx = Some(term(&args[0])?),
            _ => return Err(syn(format!("unexpected {}", it))),
        }
    }
    TransitionSystem::new(
        &name,
        vars,
        params,
        init.ok_or_else(|| syn("missing (init ...)"))?,
        tx.ok_or_else(|| syn("missing (tx ...)"))?,
        sig,
    )
}

pub fn parse_system_str(src: &str) -> Result<TransitionSystem, SystemError> {
    let v = parse_sexps(src).map_err(|e| syn(e.to_string()))?;
    match v.as_slice() {
        [s] => parse_system(s),
        _ => Err(syn("expected exactly one (system ...) form")),
    }
}
