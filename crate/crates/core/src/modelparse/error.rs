use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UnknownType,
    UnknownVariable,
    TypeMismatch,
    DuplicateName,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Lexical => "lexical error",
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownType => "unknown type",
            ParseErrorKind::UnknownVariable => "unknown variable",
            ParseErrorKind::TypeMismatch => "type mismatch",
            ParseErrorKind::DuplicateName => "duplicate name",
        })
    }
}

/// A located parse failure. Lines and columns are 1-based; columns count
/// characters, not bytes.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// Source text of the offending token (empty at end of input).
    pub token: String,
}

/// Failure to resolve a name against a parsed model.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}
