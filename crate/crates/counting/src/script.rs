use std::collections::BTreeMap;

use term_core::{parse_sexps, parse_sort, parse_term, CmpOp, Sexp, Sort, Term, Var};

use crate::CountError;

/// `|formula|_vars` as a function of `params`. Params are integers.
#[derive(Clone, Debug, PartialEq)]
pub struct CountDecl {
    pub name: String,
    pub params: Vec<String>,
    pub vars: Vec<(String, Sort)>,
    pub formula: Term,
}

impl CountDecl {
    pub fn var_sort(&self, name: &str) -> Option<&Sort> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

/// Integer function fixed by `f(base_index) = base_value` and
/// `f(n + 1) = step` for `n >= base_index`, where `step` may mention `n` and
/// `prev` (standing for `f(n)`).
#[derive(Clone, Debug, PartialEq)]
pub struct RecFun {
    pub name: String,
    pub base_index: i64,
    pub base_value: Term,
    pub step: Term,
}

impl RecFun {
    pub fn builtins() -> Vec<RecFun> {
        let n = || Term::var(Var::plain("n"));
        let prev = || Term::var(Var::plain("prev"));
        vec![
            RecFun { name: "pow2".into(), base_index: 0, base_value: Term::int(1), step: Term::mul(Term::int(2), prev()) },
            RecFun {
                name: "fact".into(),
                base_index: 0,
                base_value: Term::int(1),
                step: Term::mul(Term::add(n(), Term::int(1)), prev()),
            },
        ]
    }

    /// `f(at + 1)` expressed through `f(at)`.
    pub fn unfold(&self, at: &Term, prev: &Term) -> Term {
        let mut m = BTreeMap::new();
        m.insert(Var::plain("n"), at.clone());
        m.insert(Var::plain("prev"), prev.clone());
        self.step.subst(&m)
    }
}

/// A count instance `(name args..)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountApp {
    pub name: String,
    pub args: Vec<Term>,
}

impl CountApp {
    pub fn term(&self) -> Term {
        Term::app(self.name.clone(), self.args.clone())
    }

    pub fn subst(&self, m: &BTreeMap<Var, Term>) -> CountApp {
        CountApp { name: self.name.clone(), args: self.args.iter().map(|a| a.subst(m)).collect() }
    }
}

pub type Witness = Vec<(String, Term)>;

/// Value of one counted variable in an explicit model. Arrays can be given
/// pointwise as `(lambda ((j Int)) body)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelValue {
    Term(Term),
    Lambda(String, Sort, Term),
}

pub type ExplicitModel = Vec<(String, ModelValue)>;

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Range(CountApp),
    Positive(CountApp),
    /// With `models`, the `c` distinct solutions are given rather than searched for.
    ConstLb {
        app: CountApp,
        c: u64,
        models: Option<Vec<ExplicitModel>>,
    },
    ConstUb(CountApp, u64),
    Ub {
        f: CountApp,
        g: CountApp,
    },
    /// `f = g + h - gh`.
    Or {
        f: CountApp,
        g: CountApp,
        h: CountApp,
        gh: CountApp,
    },
    AndUb {
        h: CountApp,
        f: CountApp,
        g: CountApp,
    },
    Disjoint {
        h: CountApp,
        f: CountApp,
        g: CountApp,
    },
    Injectivity {
        f: CountApp,
        g: CountApp,
        witness: Witness,
    },
    IndGeq {
        f: CountApp,
        g: CountApp,
        n: String,
        witness: Witness,
    },
    IndLeq {
        f: CountApp,
        g: CountApp,
        n: String,
        hx: Witness,
        hy: Witness,
    },
    CloseRecurrence {
        c: CountApp,
        rel: CmpOp,
        closed: Term,
        n: String,
        base: i64,
        using: Option<Vec<String>>,
    },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Range(_) => "range",
            Rule::Positive(_) => "positive",
            Rule::ConstLb { .. } => "const-lb",
            Rule::ConstUb(..) => "const-ub",
            Rule::Ub { .. } => "ub",
            Rule::Or { .. } => "or",
            Rule::AndUb { .. } => "and-ub",
            Rule::Disjoint { .. } => "disjoint",
            Rule::Injectivity { .. } => "injectivity",
            Rule::IndGeq { .. } => "ind-geq",
            Rule::IndLeq { .. } => "ind-leq",
            Rule::CloseRecurrence { .. } => "close-recurrence",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleApp {
    pub rule: Rule,
    /// Parameter constraint assumed by the premises and kept on the fact.
    pub guard: Option<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub label: String,
    pub rules: Vec<RuleApp>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub claim: Term,
    pub guard: Option<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofScript {
    pub decls: Vec<CountDecl>,
    pub recs: Vec<RecFun>,
    pub steps: Vec<Step>,
    pub goal: Option<Goal>,
}

fn syn(msg: impl Into<String>) -> CountError {
    CountError::Syntax(msg.into())
}

fn term(s: &Sexp) -> Result<Term, CountError> {
    parse_term(s).map_err(|e| syn(e.to_string()))
}

fn atom<'a>(s: &'a Sexp, what: &str) -> Result<&'a str, CountError> {
    s.as_atom().ok_or_else(|| syn(format!("expected {}, found {}", what, s)))
}

fn int(s: &Sexp, what: &str) -> Result<i64, CountError> {
    atom(s, what)?.parse().map_err(|_| syn(format!("expected {}, found {}", what, s)))
}

/// Positional arguments up to the first `:keyword`, then keyword values.
fn split_args(items: &[Sexp]) -> Result<(Vec<&Sexp>, BTreeMap<&str, &Sexp>), CountError> {
    let mut pos = Vec::new();
    let mut kw = BTreeMap::new();
    let mut i = 0;
    while i < items.len() {
        match items[i].as_atom() {
            Some(k) if k.starts_with(':') => {
                let v = items.get(i + 1).ok_or_else(|| syn(format!("{} needs a value", k)))?;
                if kw.insert(k, v).is_some() {
                    return Err(syn(format!("{} given twice", k)));
                }
                i += 2;
            }
            _ if !kw.is_empty() => return Err(syn(format!("positional argument {} after keywords", items[i]))),
            _ => {
                pos.push(&items[i]);
                i += 1;
            }
        }
    }
    Ok((pos, kw))
}

fn app(s: &Sexp) -> Result<CountApp, CountError> {
    match s {
        Sexp::List(v) if !v.is_empty() => Ok(CountApp {
            name: atom(&v[0], "count name")?.to_string(),
            args: v[1..].iter().map(term).collect::<Result<_, _>>()?,
        }),
        Sexp::Atom(a) => Ok(CountApp { name: a.clone(), args: vec![] }),
        _ => Err(syn(format!("expected a count instance, found {}", s))),
    }
}

fn witness(s: &Sexp) -> Result<Witness, CountError> {
    let items = s.as_list().ok_or_else(|| syn(format!("expected ((var term) ..), found {}", s)))?;
    items
        .iter()
        .map(|it| match it.as_list() {
            Some([v, t]) => Ok((atom(v, "variable")?.to_string(), term(t)?)),
            _ => Err(syn(format!("bad witness entry {}", it))),
        })
        .collect()
}

fn model_value(s: &Sexp) -> Result<ModelValue, CountError> {
    match s.as_list() {
        Some([h, binder, body]) if h.is_atom("lambda") => match binder.as_list() {
            Some([b]) => match b.as_list() {
                Some([v, sort]) => Ok(ModelValue::Lambda(
                    atom(v, "variable")?.to_string(),
                    parse_sort(sort).map_err(|e| syn(e.to_string()))?,
                    term(body)?,
                )),
                _ => Err(syn(format!("bad lambda binder {}", b))),
            },
            _ => Err(syn("model lambdas take exactly one index")),
        },
        _ => Ok(ModelValue::Term(term(s)?)),
    }
}

fn models(s: &Sexp) -> Result<Vec<ExplicitModel>, CountError> {
    let ms = s.as_list().ok_or_else(|| syn(":models takes a list of models"))?;
    ms.iter()
        .map(|m| {
            m.as_list()
                .ok_or_else(|| syn(format!("bad model {}", m)))?
                .iter()
                .map(|e| match e.as_list() {
                    Some([v, val]) => Ok((atom(v, "variable")?.to_string(), model_value(val)?)),
                    _ => Err(syn(format!("bad model entry {}", e))),
                })
                .collect()
        })
        .collect()
}

fn rel(s: &Sexp) -> Result<CmpOp, CountError> {
    match atom(s, "relation")? {
        "=" => Ok(CmpOp::Eq),
        ">=" => Ok(CmpOp::Ge),
        "<=" => Ok(CmpOp::Le),
        other => Err(syn(format!("close-recurrence relation must be =, >= or <=, found {}", other))),
    }
}

fn parse_rule(s: &Sexp) -> Result<RuleApp, CountError> {
    let items = s.as_list().ok_or_else(|| syn(format!("expected a rule, found {}", s)))?;
    let head = s.head().ok_or_else(|| syn(format!("expected a rule, found {}", s)))?;
    let (pos, kw) = split_args(&items[1..])?;
    let arity = |n: usize| {
        if pos.len() == n {
            Ok(())
        } else {
            Err(syn(format!("{} takes {} arguments, found {}", head, n, pos.len())))
        }
    };
    let need = |k: &str| kw.get(k).copied().ok_or_else(|| syn(format!("{} needs {}", head, k)));
    let allowed: &[&str] = match head {
        "ind-geq" => &[":guard", ":n", ":witness"],
        "ind-leq" => &[":guard", ":n", ":hx", ":hy"],
        "injectivity" => &[":guard", ":witness"],
        "close-recurrence" => &[":n", ":base", ":using"],
        "const-lb" => &[":models"],
        _ => &[":guard"],
    };
    if let Some(k) = kw.keys().find(|k| !allowed.contains(k)) {
        return Err(syn(format!("{} does not take {}", head, k)));
    }
    let rule = match head {
        "range" | "positive" => {
            arity(1)?;
            let a = app(pos[0])?;
            if head == "range" {
                Rule::Range(a)
            } else {
                Rule::Positive(a)
            }
        }
        "const-lb" | "const-ub" => {
            arity(2)?;
            let c = int(pos[1], "count bound")?;
            if c < 1 {
                return Err(syn(format!("{} bound must be at least 1", head)));
            }
            if head == "const-lb" {
                let models = kw.get(":models").map(|m| models(m)).transpose()?;
                Rule::ConstLb { app: app(pos[0])?, c: c as u64, models }
            } else {
                Rule::ConstUb(app(pos[0])?, c as u64)
            }
        }
        "ub" => {
            arity(2)?;
            Rule::Ub { f: app(pos[0])?, g: app(pos[1])? }
        }
        "or" => {
            arity(4)?;
            Rule::Or { f: app(pos[0])?, g: app(pos[1])?, h: app(pos[2])?, gh: app(pos[3])? }
        }
        "and-ub" | "disjoint" => {
            arity(3)?;
            let (h, f, g) = (app(pos[0])?, app(pos[1])?, app(pos[2])?);
            if head == "and-ub" {
                Rule::AndUb { h, f, g }
            } else {
                Rule::Disjoint { h, f, g }
            }
        }
        "injectivity" => {
            arity(2)?;
            Rule::Injectivity { f: app(pos[0])?, g: app(pos[1])?, witness: witness(need(":witness")?)? }
        }
        "ind-geq" => {
            arity(2)?;
            Rule::IndGeq {
                f: app(pos[0])?,
                g: app(pos[1])?,
                n: atom(need(":n")?, "index variable")?.to_string(),
                witness: witness(need(":witness")?)?,
            }
        }
        "ind-leq" => {
            arity(2)?;
            Rule::IndLeq {
                f: app(pos[0])?,
                g: app(pos[1])?,
                n: atom(need(":n")?, "index variable")?.to_string(),
                hx: witness(need(":hx")?)?,
                hy: witness(need(":hy")?)?,
            }
        }
        "close-recurrence" => {
            arity(3)?;
            let using = match kw.get(":using") {
                None => None,
                Some(l) => Some(
                    l.as_list()
                        .ok_or_else(|| syn(":using takes a list of step labels"))?
                        .iter()
                        .map(|x| atom(x, "step label").map(str::to_string))
                        .collect::<Result<_, _>>()?,
                ),
            };
            Rule::CloseRecurrence {
                c: app(pos[0])?,
                rel: rel(pos[1])?,
                closed: term(pos[2])?,
                n: atom(need(":n")?, "index variable")?.to_string(),
                base: int(need(":base")?, "base index")?,
                using,
            }
        }
        other => return Err(syn(format!("unknown rule `{}`", other))),
    };
    let guard = kw.get(":guard").map(|g| term(g)).transpose()?;
    Ok(RuleApp { rule, guard })
}

fn parse_decl(items: &[Sexp]) -> Result<CountDecl, CountError> {
    let (pos, kw) = split_args(items)?;
    let [name, params] = pos.as_slice() else {
        return Err(syn("declare-count takes a name and a parameter list"));
    };
    let params = params
        .as_list()
        .ok_or_else(|| syn("declare-count parameters must be a list"))?
        .iter()
        .map(|p| atom(p, "parameter").map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    let vars = kw
        .get(":vars")
        .and_then(|v| v.as_list())
        .ok_or_else(|| syn("declare-count needs :vars ((v Sort) ..)"))?
        .iter()
        .map(|b| match b.as_list() {
            Some([v, s]) => Ok((atom(v, "variable")?.to_string(), parse_sort(s).map_err(|e| syn(e.to_string()))?)),
            _ => Err(syn(format!("bad variable binding {}", b))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let formula = term(kw.get(":formula").ok_or_else(|| syn("declare-count needs :formula"))?)?;
    Ok(CountDecl { name: atom(name, "count name")?.to_string(), params, vars, formula })
}

fn parse_rec(items: &[Sexp]) -> Result<RecFun, CountError> {
    let (pos, kw) = split_args(items)?;
    let [name] = pos.as_slice() else {
        return Err(syn("declare-rec takes a name"));
    };
    let base = kw.get(":base").and_then(|b| b.as_list()).ok_or_else(|| syn("declare-rec needs :base (index value)"))?;
    let [bi, bv] = base else {
        return Err(syn("declare-rec :base is (index value)"));
    };
    Ok(RecFun {
        name: atom(name, "function name")?.to_string(),
        base_index: int(bi, "base index")?,
        base_value: term(bv)?,
        step: term(kw.get(":step").ok_or_else(|| syn("declare-rec needs :step"))?)?,
    })
}

pub fn parse_script(s: &Sexp) -> Result<ProofScript, CountError> {
    if s.head() != Some("proof") {
        return Err(syn("a proof script starts with (proof ..)"));
    }
    let mut script = ProofScript { decls: vec![], recs: vec![], steps: vec![], goal: None };
    for item in &s.as_list().unwrap()[1..] {
        let items = item.as_list().unwrap_or(&[]);
        match item.head() {
            Some("declare-count") => script.decls.push(parse_decl(&items[1..])?),
            Some("declare-rec") => script.recs.push(parse_rec(&items[1..])?),
            Some("step") => {
                let label = items.get(1).ok_or_else(|| syn("step needs a label"))?;
                let rules = items[2..].iter().map(parse_rule).collect::<Result<Vec<_>, _>>()?;
                if rules.is_empty() {
                    return Err(syn(format!("step {} has no rules", label)));
                }
                script.steps.push(Step { label: atom(label, "step label")?.to_string(), rules });
            }
            Some("goal") => {
                if script.goal.is_some() {
                    return Err(syn("more than one goal"));
                }
                let (pos, kw) = split_args(&items[1..])?;
                let [claim] = pos.as_slice() else {
                    return Err(syn("goal takes one claim"));
                };
                script.goal = Some(Goal { claim: term(claim)?, guard: kw.get(":guard").map(|g| term(g)).transpose()? });
            }
            _ => return Err(syn(format!("unexpected item {}", item))),
        }
    }
    Ok(script)
}

pub fn parse_script_str(src: &str) -> Result<ProofScript, CountError> {
    let v = parse_sexps(src).map_err(|e| syn(e.to_string()))?;
    match v.as_slice() {
        [s] => parse_script(s),
        _ => Err(syn(format!("expected one (proof ..) form, found {}", v.len()))),
    }
}
