use std::collections::BTreeMap;
use std::fmt;

use term_core::{parse_term, BigInt, Sexp, Term};

/// One `define-fun` of a solver model, kept as parsed S-expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub params: Sexp,
    pub sort: Sexp,
    pub body: Sexp,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model {
    pub entries: BTreeMap<String, ModelEntry>,
}

impl Model {
    pub fn get(&self, name: &str) -> Option<&Sexp> {
        self.entries.get(name).map(|e| &e.body)
    }

    /// Integer value of a nullary symbol, if it is a plain numeral.
    pub fn int(&self, name: &str) -> Option<BigInt> {
        let body = self.get(name)?;
        match parse_term(body).ok()? {
            Term::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            match e.params.as_list() {
                Some([]) | None => write!(f, "{} = {}", name, e.body)?,
                Some(_) => write!(f, "{} {} = {}", name, e.params, e.body)?,
            }
        }
        Ok(())
    }
}

/// Accepts both `((define-fun ..) ..)` and the older `(model (define-fun ..) ..)`.
pub fn parse_model(s: &Sexp) -> Option<Model> {
    let items = s.as_list()?;
    let items = if s.head() == Some("model") { &items[1..] } else { items };
    let mut m = Model::default();
    for it in items {
        match it.as_list()? {
            [h, name, params, sort, body] if h.is_atom("define-fun") => {
                m.entries.insert(
                    name.as_atom()?.to_string(),
                    ModelEntry { params: params.clone(), sort: sort.clone(), body: body.clone() },
                );
            }
            // Declarations of uninterpreted sort universes and comments are skipped.
            _ => {}
        }
    }
    Some(m)
}
