use std::collections::BTreeMap;
use std::fmt;

/// Concrete value. Arrays have finite support over a default element and
/// are kept canonical (no entry equals the default), so `==` is extensional.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Array(ArrayValue),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrayValue {
    pub default: Box<Value>,
    pub entries: BTreeMap<i64, Value>,
}

impl ArrayValue {
    pub fn constant(default: Value) -> ArrayValue {
        ArrayValue { default: Box::new(default), entries: BTreeMap::new() }
    }

    pub fn get(&self, i: i64) -> &Value {
        self.entries.get(&i).unwrap_or(&self.default)
    }

    pub fn set(&mut self, i: i64, v: Value) {
        if v == *self.default {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, v);
        }
    }

    pub fn stored(&self, i: i64, v: Value) -> ArrayValue {
        let mut a = self.clone();
        a.set(i, v);
        a
    }
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&ArrayValue> {
        match self {
            Value::Array(a) => Some(a),
            _ => None,
        }
    }

    /// Every integer mentioned by the value, indices included.
    pub fn ints(&self, out: &mut Vec<i64>) {
        match self {
            Value::Int(n) => out.push(*n),
            Value::Bool(_) => {}
            Value::Array(a) => {
                a.default.ints(out);
                for (i, v) in &a.entries {
                    out.push(*i);
                    v.ints(out);
                }
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{}", n),
            Value::Bool(b) => write!(f, "{}", b),
            Value::Array(a) => {
                write!(f, "[")?;
                for (i, (k, v)) in a.entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}: {}", k, v)?;
                }
                if !a.entries.is_empty() {
                    write!(f, ", ")?;
                }
                write!(f, "_: {}]", a.default)
            }
        }
    }
}
