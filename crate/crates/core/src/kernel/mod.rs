//! Core formal objects: typed state variables, states, traces, transition
//! systems and invariant properties, plus their evaluation semantics.

mod domain;
mod expr;
pub(crate) mod system;

pub use domain::{Domain, EnumType, Type, TypeId, Types, Value, MAX_SET_ELEMENTS};
pub use expr::{
    eval, infer, ArithOp, CmpOp, Env, EvalError, Expr, Mode, ParamKind, QuantKind, TypeError,
    VarId,
};
pub(crate) use expr::{arith_type, cmp_type, describe, member_type, unify};
pub use system::{
    eval_state, eval_transition, trace_satisfies_property, PartialState, Property, RecordId,
    RecordType, RecordVar, Signature, State, SymbolicTransitionSystem, Trace, VarDecl,
};

use thiserror::Error;

/// Structural errors raised while assembling kernel objects.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("empty domain: {0}")]
    EmptyDomain(String),
    #[error("duplicate {0}")]
    Duplicate(String),
    #[error("unknown type {0}")]
    UnknownType(String),
    #[error("set element type `{0}` has too many symbols")]
    SetTooLarge(String),
    #[error("value {value} is outside the domain of `{var}`")]
    OutOfDomain { var: String, value: String },
    #[error("state has {got} values, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("trace must contain at least one state")]
    EmptyTrace,
    #[error("type error: {0}")]
    Type(#[from] TypeError),
}
