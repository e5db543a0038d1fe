//! Value domains and the values that inhabit them.

use std::fmt;

use super::KernelError;

/// Index of an enumerated type in a [`Signature`](super::Signature).
pub type TypeId = usize;

/// Largest enumeration that may be used as a set element type. Set domains
/// are enumerated exhaustively, so this keeps them at most 1024 values wide.
pub const MAX_SET_ELEMENTS: usize = 10;

/// A named enumerated type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EnumType {
    pub name: String,
    pub symbols: Vec<String>,
}

/// The set of values a state variable may take.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    Int { lo: i64, hi: i64 },
    Enum(TypeId),
    /// Subsets of the symbols of an enumerated type.
    Set(TypeId),
}

/// Static type of an expression. Integer ranges are erased: any two integer
/// expressions compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    Int,
    Enum(TypeId),
    Set(TypeId),
    /// The empty set literal `{}` before its element type is known.
    EmptySet,
    /// A trace position (only inside predicate bodies).
    Pos,
}

impl Type {
    /// Whether two types may be compared for equality.
    pub fn compatible(self, other: Type) -> bool {
        match (self, other) {
            (Type::EmptySet, Type::Set(_)) | (Type::Set(_), Type::EmptySet) => true,
            (Type::Pos, Type::Int) | (Type::Int, Type::Pos) => true,
            (a, b) => a == b,
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Type::Int | Type::Pos)
    }
}

impl Domain {
    pub fn ty(self) -> Type {
        match self {
            Domain::Bool => Type::Bool,
            Domain::Int { .. } => Type::Int,
            Domain::Enum(t) => Type::Enum(t),
            Domain::Set(t) => Type::Set(t),
        }
    }
}

/// A concrete value. Symbols are indices into their enumerated type and sets
/// are bitmasks over the element type's symbols, so the derived ordering is
/// the canonical value order of every domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Sym(u32),
    Set(u64),
}

impl Value {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => write!(f, "#{s}"),
            Value::Set(m) => write!(f, "set:{m:#b}"),
        }
    }
}

/// The enumerated types of a model, with symbol lookup.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Types {
    enums: Vec<EnumType>,
}

impl Types {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_enum(&mut self, name: &str, symbols: Vec<String>) -> Result<TypeId, KernelError> {
        if symbols.is_empty() {
            return Err(KernelError::EmptyDomain(name.to_string()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(KernelError::Duplicate(format!("symbol `{s}` in type `{name}`")));
            }
            if let Some((t, _)) = self.symbol(s) {
                return Err(KernelError::Duplicate(format!(
                    "symbol `{s}` already declared in type `{}`",
                    self.enums[t].name
                )));
            }
        }
        if self.lookup(name).is_some() {
            return Err(KernelError::Duplicate(format!("type `{name}`")));
        }
        self.enums.push(EnumType {
            name: name.to_string(),
            symbols,
        });
        Ok(self.enums.len() - 1)
    }

    pub fn get(&self, id: TypeId) -> &EnumType {
        &self.enums[id]
    }

    pub fn len(&self) -> usize {
        self.enums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.enums.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EnumType> {
        self.enums.iter()
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.enums.iter().position(|e| e.name == name)
    }

    /// Resolves a symbol to its type and index. Symbols are unique across
    /// all enumerated types of a model.
    pub fn symbol(&self, name: &str) -> Option<(TypeId, u32)> {
        self.enums.iter().enumerate().find_map(|(t, e)| {
            e.symbols
                .iter()
                .position(|s| s == name)
                .map(|i| (t, i as u32))
        })
    }

    pub fn validate(&self, domain: Domain) -> Result<(), KernelError> {
        match domain {
            Domain::Bool => Ok(()),
            Domain::Int { lo, hi } if lo > hi => Err(KernelError::EmptyDomain(format!(
                "int[{lo}..{hi}]"
            ))),
            Domain::Int { .. } => Ok(()),
            Domain::Enum(t) if t < self.enums.len() => Ok(()),
            Domain::Set(t) if t < self.enums.len() => {
                if self.enums[t].symbols.len() > MAX_SET_ELEMENTS {
                    Err(KernelError::SetTooLarge(self.enums[t].name.clone()))
                } else {
                    Ok(())
                }
            }
            Domain::Enum(t) | Domain::Set(t) => Err(KernelError::UnknownType(format!("#{t}"))),
        }
    }

    /// All values of a domain in canonical order.
    pub fn values(&self, domain: Domain) -> Vec<Value> {
        match domain {
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::Int { lo, hi } => (lo..=hi).map(Value::Int).collect(),
            Domain::Enum(t) => (0..self.enums[t].symbols.len() as u32)
                .map(Value::Sym)
                .collect(),
            Domain::Set(t) => {
                let n = self.enums[t].symbols.len();
                (0..(1u64 << n)).map(Value::Set).collect()
            }
        }
    }

    pub fn contains(&self, domain: Domain, value: Value) -> bool {
        match (domain, value) {
            (Domain::Bool, Value::Bool(_)) => true,
            (Domain::Int { lo, hi }, Value::Int(i)) => lo <= i && i <= hi,
            (Domain::Enum(t), Value::Sym(s)) => (s as usize) < self.enums[t].symbols.len(),
            (Domain::Set(t), Value::Set(m)) => {
                let n = self.enums[t].symbols.len();
                m >> n == 0
            }
            _ => false,
        }
    }

    /// Renders a value in model syntax, given its type.
    pub fn render(&self, ty: Type, value: Value) -> String {
        match (ty, value) {
            (Type::Enum(t), Value::Sym(s)) => self
                .enums
                .get(t)
                .and_then(|e| e.symbols.get(s as usize))
                .cloned()
                .unwrap_or_else(|| format!("#{s}")),
            (Type::Set(t), Value::Set(m)) => {
                let names: Vec<&str> = self.enums[t]
                    .symbols
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m & (1 << i) != 0)
                    .map(|(_, s)| s.as_str())
                    .collect();
                format!("{{{}}}", names.join(", "))
            }
            (_, v) => v.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys() -> Types {
        let mut t = Types::new();
        t.add_enum("Key", vec!["NoKey".into(), "KeyAB".into()]).unwrap();
        t
    }

    #[test]
    fn symbols_are_unique_across_types() {
        let mut t = keys();
        let err = t.add_enum("Other", vec!["KeyAB".into()]).unwrap_err();
        assert!(matches!(err, KernelError::Duplicate(_)));
    }

    #[test]
    fn empty_int_range_is_rejected() {
        let t = Types::new();
        assert!(t.validate(Domain::Int { lo: 3, hi: 1 }).is_err());
        assert!(t.validate(Domain::Int { lo: 1, hi: 1 }).is_ok());
    }

    #[test]
    fn set_values_are_all_subsets() {
        let t = keys();
        let vals = t.values(Domain::Set(0));
        assert_eq!(vals.len(), 4);
        assert_eq!(t.render(Type::Set(0), Value::Set(0b10)), "{KeyAB}");
        assert_eq!(t.render(Type::Set(0), Value::Set(0)), "{}");
        assert!(!t.contains(Domain::Set(0), Value::Set(0b100)));
    }

    #[test]
    fn int_values_are_ascending() {
        let t = Types::new();
        let vals = t.values(Domain::Int { lo: -1, hi: 1 });
        assert_eq!(vals, vec![Value::Int(-1), Value::Int(0), Value::Int(1)]);
    }
}
