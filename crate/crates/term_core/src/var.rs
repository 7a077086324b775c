use std::fmt;

/// Copy tag of a state variable: `x`, `x!` (next state), `x@i` (copy `i` of a
/// self-composition) and `x@i!` (next state of copy `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Plain,
    Primed,
    Indexed(u32),
    IndexedPrimed(u32),
}

impl Tag {
    /// The next-state counterpart of a current-state tag.
    pub fn primed(self) -> Option<Tag> {
        match self {
            Tag::Plain => Some(Tag::Primed),
            Tag::Indexed(i) => Some(Tag::IndexedPrimed(i)),
            _ => None,
        }
    }

    pub fn is_primed(self) -> bool {
        matches!(self, Tag::Primed | Tag::IndexedPrimed(_))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Plain => write!(f, "plain"),
            Tag::Primed => write!(f, "primed"),
            Tag::Indexed(i) => write!(f, "indexed({})", i),
            Tag::IndexedPrimed(i) => write!(f, "indexed-primed({})", i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub base: String,
    pub tag: Tag,
}

impl Var {
    pub fn new(base: impl Into<String>, tag: Tag) -> Var {
        Var { base: base.into(), tag }
    }

    pub fn plain(base: impl Into<String>) -> Var {
        Var::new(base, Tag::Plain)
    }

    pub fn with_tag(&self, tag: Tag) -> Var {
        Var { base: self.base.clone(), tag }
    }

    /// Decode the printed form produced by `Display`.
    pub fn from_symbol(sym: &str) -> Var {
        let (rest, primed) = match sym.strip_suffix('!') {
            Some(r) if !r.is_empty() => (r, true),
            _ => (sym, false),
        };
        if let Some(at) = rest.rfind('@') {
            let (base, idx) = (&rest[..at], &rest[at + 1..]);
            if !base.is_empty() && !idx.is_empty() && idx.bytes().all(|b| b.is_ascii_digit()) {
                if let Ok(i) = idx.parse::<u32>() {
                    let tag = if primed { Tag::IndexedPrimed(i) } else { Tag::Indexed(i) };
                    return Var::new(base, tag);
                }
            }
        }
        Var::new(rest, if primed { Tag::Primed } else { Tag::Plain })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            Tag::Plain => write!(f, "{}", self.base),
            Tag::Primed => write!(f, "{}!", self.base),
            Tag::Indexed(i) => write!(f, "{}@{}", self.base, i),
            Tag::IndexedPrimed(i) => write!(f, "{}@{}!", self.base, i),
        }
    }
}
