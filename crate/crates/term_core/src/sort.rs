use std::fmt;

/// A sort of the many-sorted theory. Array sorts nest by value, so they are
/// finite and acyclic by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    Int,
    Array(Box<Sort>, Box<Sort>),
    Uninterpreted(String),
}

impl Sort {
    pub fn array(index: Sort, element: Sort) -> Sort {
        Sort::Array(Box::new(index), Box::new(element))
    }

    pub fn is_array(&self) -> bool {
        matches!(self, Sort::Array(..))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::Array(i, e) => write!(f, "(Array {} {})", i, e),
            Sort::Uninterpreted(n) => write!(f, "{}", n),
        }
    }
}
