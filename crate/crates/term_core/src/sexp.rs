use std::fmt;

use thiserror::Error;

/// Minimal S-expression tree. String literals keep their quotes; `|quoted|`
/// symbols are stored without the bars.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

#[derive(Debug, Error, PartialEq)]
pub enum SexpError {
    #[error("line {line}: unexpected ')'")]
    UnexpectedClose { line: usize },
    #[error("line {line}: unclosed '('")]
    Unclosed { line: usize },
    #[error("line {line}: unterminated {what}")]
    Unterminated { line: usize, what: &'static str },
}

impl Sexp {
    pub fn atom(s: impl Into<String>) -> Sexp {
        Sexp::Atom(s.into())
    }

    pub fn list(v: Vec<Sexp>) -> Sexp {
        Sexp::List(v)
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v) => Some(v),
            _ => None,
        }
    }

    /// Head symbol of a non-empty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|v| v.first()).and_then(Sexp::as_atom)
    }

    pub fn is_atom(&self, s: &str) -> bool {
        self.as_atom() == Some(s)
    }

    /// Multi-line rendering used for human-facing files; lists that fit in
    /// `width` columns stay on one line.
    pub fn pretty(&self, width: usize) -> String {
        let mut out = String::new();
        pretty_into(self, 0, width, &mut out);
        out
    }
}

fn pretty_into(s: &Sexp, indent: usize, width: usize, out: &mut String) {
    let flat = s.to_string();
    match s {
        Sexp::List(v) if flat.len() + indent > width && v.len() > 1 => {
            out.push('(');
            out.push_str(&v[0].to_string());
            for c in &v[1..] {
                out.push('\n');
                out.push_str(&" ".repeat(indent + 2));
                pretty_into(c, indent + 2, width, out);
            }
            out.push(')');
        }
        _ => out.push_str(&flat),
    }
}

fn needs_bars(a: &str) -> bool {
    a.is_empty() || (!a.starts_with('"') && a.chars().any(|c| c.is_whitespace() || c == '(' || c == ')' || c == ';' || c == '|'))
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) if needs_bars(a) => write!(f, "|{}|", a),
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(v) => {
                f.write_str("(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", c)?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Parse every top-level S-expression in `src`. `;` starts a line comment.
pub fn parse_sexps(src: &str) -> Result<Vec<Sexp>, SexpError> {
    let chars: Vec<char> = src.chars().collect();
    let mut line = 1;
    let mut i = 0;
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    let mut push = |stack: &mut Vec<(usize, Vec<Sexp>)>, e: Sexp| match stack.last_mut() {
        Some((_, v)) => v.push(e),
        None => top.push(e),
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push((line, Vec::new()));
                i += 1;
            }
            ')' => {
                let (_, v) = stack.pop().ok_or(SexpError::UnexpectedClose { line })?;
                push(&mut stack, Sexp::List(v));
                i += 1;
            }
            '|' => {
                let start = line;
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '|' {
                    if chars[j] == '\n' {
                        line += 1;
                    }
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(SexpError::Unterminated { line: start, what: "quoted symbol" });
                }
                push(&mut stack, Sexp::Atom(chars[i + 1..j].iter().collect()));
                i = j + 1;
            }
            '"' => {
                let start = line;
                let mut j = i + 1;
                loop {
                    if j >= chars.len() {
                        return Err(SexpError::Unterminated { line: start, what: "string" });
                    }
                    if chars[j] == '"' {
                        // SMT-LIB escapes a quote by doubling it.
                        if j + 1 < chars.len() && chars[j + 1] == '"' {
                            j += 2;
                            continue;
                        }
                        break;
                    }
                    if chars[j] == '\n' {
                        line += 1;
                    }
                    j += 1;
                }
                push(&mut stack, Sexp::Atom(chars[i..=j].iter().collect()));
                i = j + 1;
            }
            _ => {
                let mut j = i;
                while j < chars.len() && !chars[j].is_whitespace() && !matches!(chars[j], '(' | ')' | ';' | '"' | '|') {
                    j += 1;
                }
                push(&mut stack, Sexp::Atom(chars[i..j].iter().collect()));
                i = j;
            }
        }
    }
    if let Some((l, _)) = stack.last() {
        return Err(SexpError::Unclosed { line: *l });
    }
    Ok(top)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_and_comments() {
        let v = parse_sexps("(a (b c) ; note\n \"s t\" |x y|)").unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "(a (b c) \"s t\" |x y|)");
    }

    #[test]
    fn reports_unbalanced_input() {
        assert_eq!(parse_sexps("(a\n(b)"), Err(SexpError::Unclosed { line: 1 }));
        assert_eq!(parse_sexps("a)\n"), Err(SexpError::UnexpectedClose { line: 1 }));
    }

    #[test]
    fn pretty_breaks_long_lists() {
        let s = &parse_sexps("(and (= x 1) (= y 2))").unwrap()[0];
        assert_eq!(s.pretty(80), "(and (= x 1) (= y 2))");
        assert_eq!(s.pretty(10), "(and\n  (= x 1)\n  (= y 2))");
        assert_eq!(&parse_sexps(&s.pretty(10)).unwrap()[0], s);
    }
}
