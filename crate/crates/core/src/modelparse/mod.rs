//! The model language: transition systems, invariants, predicate
//! definitions and predicate sets, plus trace-constraint (block) files.
//!
//! ```text
//! type Kind = {Plaintext, Encrypted}
//! record Message { type: Kind, secret: bool }
//! var msg: Message
//! var seen: bool
//! init not seen
//! trans seen' = (seen or msg.secret')
//! invariant Safe: not seen
//! pred leaks[t: pos] { msg.secret@t }
//! builtin eq = equality over msg
//! predset mine = eq, leaks
//! ```

mod error;
mod lexer;
mod parser;
mod printer;

use std::sync::Arc;

pub use error::{LookupError, ParseError, ParseErrorKind};
pub use parser::{parse_constraint, parse_constraints, parse_library, parse_model, parse_predicate};
pub use printer::{print_expr, print_model};

use crate::factgen::{BuiltinDef, BuiltinKind, PredicateDef, PredicateEntry, PredicateSet};
use crate::kernel::{Expr, Property, SymbolicTransitionSystem};

/// A parsed and typechecked model file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub system: SymbolicTransitionSystem,
    /// Declared invariants in source order. The trivially true property
    /// `true` is available through [`Model::property`] unless redefined.
    pub properties: Vec<Property>,
    pub predicates: Vec<Arc<PredicateDef>>,
    /// Declared built-ins; these shadow the defaults of the same name.
    pub builtins: Vec<BuiltinDef>,
    pub predsets: Vec<(String, Vec<String>)>,
}

/// Built-ins every model has unless it redeclares the name.
pub fn default_builtins() -> Vec<BuiltinDef> {
    [
        ("eq", BuiltinKind::Equality),
        ("neq", BuiltinKind::Disequality),
        ("lt", BuiltinKind::Order),
        ("true", BuiltinKind::Trivial),
    ]
    .into_iter()
    .map(|(name, kind)| BuiltinDef {
        name: name.to_string(),
        kind,
        scope: None,
    })
    .collect()
}

/// Spellings accepted for the default built-ins.
fn alias(name: &str) -> &str {
    match name {
        "=" => "eq",
        "!=" | "≠" => "neq",
        "<" => "lt",
        "⊤" => "true",
        other => other,
    }
}

impl Model {
    pub fn property(&self, name: &str) -> Result<Property, LookupError> {
        if let Some(p) = self.properties.iter().find(|p| p.name == name) {
            return Ok(p.clone());
        }
        if name == "true" {
            return Ok(Property::invariant("true", Expr::tt()));
        }
        Err(LookupError::UnknownProperty(name.to_string()))
    }

    /// The first declared property, or `true` when there is none.
    pub fn default_property(&self) -> Property {
        self.properties
            .first()
            .cloned()
            .unwrap_or_else(|| Property::invariant("true", Expr::tt()))
    }

    pub fn predicate(&self, name: &str) -> Option<&Arc<PredicateDef>> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn builtin(&self, name: &str) -> Option<BuiltinDef> {
        let name = alias(name);
        self.builtins
            .iter()
            .find(|b| b.name == name)
            .cloned()
            .or_else(|| default_builtins().into_iter().find(|b| b.name == name))
    }

    fn predset(&self, name: &str) -> Option<Vec<String>> {
        if let Some((_, members)) = self.predsets.iter().find(|(n, _)| n == name) {
            return Some(members.clone());
        }
        (name == "generic").then(|| vec!["eq".to_string(), "lt".to_string()])
    }

    /// Resolves predicate, built-in and predicate-set names into a
    /// predicate set, expanding sets in place.
    pub fn predicate_set<S: AsRef<str>>(&self, names: &[S]) -> Result<PredicateSet, LookupError> {
        let mut out = Vec::new();
        for n in names {
            self.resolve_into(n.as_ref(), &mut out, &mut Vec::new())?;
        }
        Ok(PredicateSet::new(out))
    }

    fn resolve_into(
        &self,
        name: &str,
        out: &mut Vec<PredicateEntry>,
        stack: &mut Vec<String>,
    ) -> Result<(), LookupError> {
        if let Some(p) = self.predicate(name) {
            out.push(PredicateEntry::User(p.clone()));
            return Ok(());
        }
        if let Some(b) = self.builtins.iter().find(|b| b.name == alias(name)) {
            out.push(PredicateEntry::Builtin(b.clone()));
            return Ok(());
        }
        if let Some(members) = self.predset(name) {
            if stack.iter().any(|s| s == name) {
                return Err(LookupError::UnknownPredicate(format!("{name} (cyclic set)")));
            }
            stack.push(name.to_string());
            for m in &members {
                self.resolve_into(m, out, stack)?;
            }
            stack.pop();
            return Ok(());
        }
        if let Some(b) = self.builtin(name) {
            out.push(PredicateEntry::Builtin(b));
            return Ok(());
        }
        Err(LookupError::UnknownPredicate(name.to_string()))
    }
}
