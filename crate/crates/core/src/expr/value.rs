use std::fmt;

use serde::{Deserialize, Serialize};

/// Static type of a value. `Unknown` only appears as the element type of a
/// literal empty sequence before unification.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Int,
    Bool,
    Text,
    Unit,
    Tuple(Vec<Type>),
    Seq(Box<Type>),
    Unknown,
}

impl Type {
    /// Most specific type compatible with both, if any.
    pub fn unify(&self, other: &Type) -> Option<Type> {
        match (self, other) {
            (Type::Unknown, t) | (t, Type::Unknown) => Some(t.clone()),
            (Type::Seq(a), Type::Seq(b)) => Some(Type::Seq(Box::new(a.unify(b)?))),
            (Type::Tuple(a), Type::Tuple(b)) if a.len() == b.len() => Some(Type::Tuple(
                a.iter().zip(b).map(|(x, y)| x.unify(y)).collect::<Option<_>>()?,
            )),
            (a, b) if a == b => Some(a.clone()),
            _ => None,
        }
    }

    pub fn is_concrete(&self) -> bool {
        match self {
            Type::Unknown => false,
            Type::Tuple(ts) => ts.iter().all(Type::is_concrete),
            Type::Seq(t) => t.is_concrete(),
            _ => true,
        }
    }

    /// Zero value of the type: 0, false, "", unit, element-wise tuple, empty seq.
    pub fn default_value(&self) -> Value {
        match self {
            Type::Int => Value::Int(0),
            Type::Bool => Value::Bool(false),
            Type::Text => Value::Text(String::new()),
            Type::Unit | Type::Unknown => Value::Unit,
            Type::Tuple(ts) => Value::Tuple(ts.iter().map(Type::default_value).collect()),
            Type::Seq(_) => Value::Seq(Vec::new()),
        }
    }

    /// Product of parameter types: UNIT for none, the type itself for one,
    /// a tuple otherwise.
    pub fn product(types: &[Type]) -> Type {
        match types {
            [] => Type::Unit,
            [t] => t.clone(),
            ts => Type::Tuple(ts.to_vec()),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "INT"),
            Type::Bool => write!(f, "BOOL"),
            Type::Text => write!(f, "TEXT"),
            Type::Unit => write!(f, "UNIT"),
            Type::Unknown => write!(f, "?"),
            Type::Seq(t) => write!(f, "seq({t})"),
            Type::Tuple(ts) => {
                write!(f, "(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A runtime datum. The derived ordering puts INT before BOOL before TEXT
/// before composites, which is the canonical order used for markings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Text(String),
    Unit,
    Tuple(Vec<Value>),
    Seq(Vec<Value>),
}

impl Value {
    /// Type of the value; the element type of an empty sequence is `Unknown`.
    pub fn type_of(&self) -> Type {
        match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
            Value::Text(_) => Type::Text,
            Value::Unit => Type::Unit,
            Value::Tuple(vs) => Type::Tuple(vs.iter().map(Value::type_of).collect()),
            Value::Seq(vs) => {
                let elem = vs
                    .iter()
                    .map(Value::type_of)
                    .try_fold(Type::Unknown, |acc, t| acc.unify(&t))
                    .unwrap_or(Type::Unknown);
                Type::Seq(Box::new(elem))
            }
        }
    }

    pub fn conforms_to(&self, ty: &Type) -> bool {
        match (self, ty) {
            (_, Type::Unknown) => true,
            (Value::Int(_), Type::Int)
            | (Value::Bool(_), Type::Bool)
            | (Value::Text(_), Type::Text)
            | (Value::Unit, Type::Unit) => true,
            (Value::Tuple(vs), Type::Tuple(ts)) => {
                vs.len() == ts.len() && vs.iter().zip(ts).all(|(v, t)| v.conforms_to(t))
            }
            (Value::Seq(vs), Type::Seq(t)) => vs.iter().all(|v| v.conforms_to(t)),
            _ => false,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_seq(&self) -> Option<&[Value]> {
        match self {
            Value::Seq(vs) => Some(vs),
            _ => None,
        }
    }

    /// Follows a projection path such as `[0, 3]` through nested tuples.
    pub fn project(&self, path: &[usize]) -> Option<&Value> {
        let mut v = self;
        for &i in path {
            match v {
                Value::Tuple(vs) => v = vs.get(i)?,
                _ => return None,
            }
        }
        Some(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, vs: &[Value]) -> fmt::Result {
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            Ok(())
        }
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s:?}"),
            Value::Unit => write!(f, "()"),
            Value::Tuple(vs) => {
                write!(f, "(")?;
                list(f, vs)?;
                write!(f, ")")
            }
            Value::Seq(vs) => {
                write!(f, "[")?;
                list(f, vs)?;
                write!(f, "]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_by_kind() {
        let mut vs = vec![
            Value::Tuple(vec![]),
            Value::Text("a".into()),
            Value::Bool(true),
            Value::Int(9),
        ];
        vs.sort();
        assert_eq!(vs[0], Value::Int(9));
        assert_eq!(vs[1], Value::Bool(true));
        assert_eq!(vs[2], Value::Text("a".into()));
    }

    #[test]
    fn unify_fills_unknown_elements() {
        let empty = Type::Seq(Box::new(Type::Unknown));
        let ints = Type::Seq(Box::new(Type::Int));
        assert_eq!(empty.unify(&ints), Some(ints.clone()));
        assert_eq!(Type::Int.unify(&Type::Text), None);
    }

    #[test]
    fn display_round_trips_through_parser_syntax() {
        let v = Value::Tuple(vec![Value::Int(1), Value::Text("x".into()), Value::Seq(vec![])]);
        assert_eq!(v.to_string(), "(1, \"x\", [])");
    }
}
