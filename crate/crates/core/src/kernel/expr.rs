//! Expression syntax, static typing and three-valued evaluation.
//!
//! Evaluation is Kleene-style: a sub-expression whose variables are not yet
//! assigned evaluates to `None`, and connectives propagate unknowns only
//! when the known operands do not already decide the result. The verifier
//! relies on this to prune partial successor assignments early.

use std::fmt;

use thiserror::Error;

use super::domain::{Type, TypeId, Value};
use super::system::Signature;

/// Index of a flat state variable in its [`Signature`].
pub type VarId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// `+`/`-` on integers; union/difference on sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantKind {
    All,
    Some,
}

/// Kind of a predicate parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamKind {
    /// A trace position.
    Pos,
    /// A value slot bound to `var@pos` for a variable of this type.
    Value(Type),
    /// A record slot bound to `recvar@pos`; fields are accessed as `p.field`.
    Record(usize),
}

/// Expression AST. Variables are resolved to indices at parse time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Value, Type),
    /// Set literal; every element must be a symbol of the given type. The
    /// type is `None` only for `{}`.
    SetOf(Option<TypeId>, Vec<Expr>),
    /// Current-state variable.
    Var(VarId),
    /// Next-state (primed) variable.
    Next(VarId),
    /// `x@t` where `t` is a position slot.
    At(VarId, usize),
    /// A position slot used as a value (only compared).
    Pos(usize),
    /// A value or record parameter of a predicate, with an optional field.
    Param(usize, Option<usize>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Member(Box<Expr>, Box<Expr>),
    /// Position quantifier binding slot `.1`; ranges over the positions up
    /// to the environment's horizon.
    Quant(QuantKind, usize, Box<Expr>),
}

impl Expr {
    pub fn tt() -> Expr {
        Expr::Lit(Value::Bool(true), Type::Bool)
    }

    pub fn int(i: i64) -> Expr {
        Expr::Lit(Value::Int(i), Type::Int)
    }

    pub fn cmp(op: CmpOp, l: Expr, r: Expr) -> Expr {
        Expr::Cmp(op, Box::new(l), Box::new(r))
    }

    pub fn arith(op: ArithOp, l: Expr, r: Expr) -> Expr {
        Expr::Arith(op, Box::new(l), Box::new(r))
    }

    pub fn negation(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn implies(l: Expr, r: Expr) -> Expr {
        Expr::Implies(Box::new(l), Box::new(r))
    }

    /// Whether the expression mentions any primed variable.
    pub fn mentions_next(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Next(_)));
        found
    }

    /// Whether the expression contains a position quantifier.
    pub fn has_quantifier(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| found |= matches!(e, Expr::Quant(..)));
        found
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Lit(..)
            | Expr::Var(_)
            | Expr::Next(_)
            | Expr::At(..)
            | Expr::Pos(_)
            | Expr::Param(..) => {}
            Expr::SetOf(_, es) | Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.visit(f)),
            Expr::Not(e) | Expr::Quant(_, _, e) => e.visit(f),
            Expr::Implies(a, b) | Expr::Cmp(_, a, b) | Expr::Arith(_, a, b) | Expr::Member(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Ite(c, a, b) => {
                c.visit(f);
                a.visit(f);
                b.visit(f);
            }
        }
    }
}

/// Static typing failure.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct TypeError(pub String);

/// Which references an expression may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Initial predicates and invariants: current-state variables only.
    State,
    /// Transition predicates: current and primed variables.
    Transition,
    /// Predicate bodies: positional access and parameters only.
    Predicate,
}

/// Computes the type of `expr`, checking operand types, reference legality
/// for `mode`, and parameter usage against `params`.
pub fn infer(
    expr: &Expr,
    sig: &Signature,
    params: &[ParamKind],
    mode: Mode,
) -> Result<Type, TypeError> {
    Typer {
        sig,
        params,
        mode,
        bound: Vec::new(),
    }
    .infer(expr)
}

struct Typer<'a> {
    sig: &'a Signature,
    params: &'a [ParamKind],
    mode: Mode,
    /// Number of quantifier slots currently in scope, above the parameters.
    bound: Vec<usize>,
}

impl Typer<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TypeError> {
        Err(TypeError(msg.into()))
    }

    fn var_type(&self, v: VarId) -> Result<Type, TypeError> {
        match self.sig.vars.get(v) {
            Some(d) => Ok(d.domain.ty()),
            None => self.err(format!("unknown variable #{v}")),
        }
    }

    fn pos_slot(&self, slot: usize) -> Result<(), TypeError> {
        if slot < self.params.len() {
            if self.params[slot] == ParamKind::Pos {
                return Ok(());
            }
            return self.err("parameter is not a position");
        }
        if self.bound.contains(&slot) {
            return Ok(());
        }
        self.err(format!("unbound position slot #{slot}"))
    }

    fn infer(&mut self, e: &Expr) -> Result<Type, TypeError> {
        match e {
            Expr::Lit(v, t) => {
                let ok = matches!(
                    (v, t),
                    (Value::Bool(_), Type::Bool)
                        | (Value::Int(_), Type::Int)
                        | (Value::Sym(_), Type::Enum(_))
                        | (Value::Set(_), Type::Set(_))
                );
                if ok {
                    Ok(*t)
                } else {
                    self.err("malformed literal")
                }
            }
            Expr::SetOf(ty, elems) => {
                for el in elems {
                    let t = self.infer(el)?;
                    if Some(t) != ty.map(Type::Enum) {
                        return self.err("set elements must be symbols of one enumerated type");
                    }
                }
                Ok(ty.map_or(Type::EmptySet, Type::Set))
            }
            Expr::Var(v) => {
                if self.mode == Mode::Predicate {
                    return self.err(format!(
                        "variable `{}` needs a position (`@`) inside a predicate",
                        self.sig.vars[*v].name
                    ));
                }
                self.var_type(*v)
            }
            Expr::Next(v) => {
                if self.mode != Mode::Transition {
                    return self.err(format!(
                        "primed variable `{}'` is only allowed in transition predicates",
                        self.sig.vars.get(*v).map_or("?", |d| d.name.as_str())
                    ));
                }
                self.var_type(*v)
            }
            Expr::At(v, slot) => {
                if self.mode != Mode::Predicate {
                    return self.err("positional access is only allowed in predicate bodies");
                }
                self.pos_slot(*slot)?;
                self.var_type(*v)
            }
            Expr::Pos(slot) => {
                if self.mode != Mode::Predicate {
                    return self.err("positions are only allowed in predicate bodies");
                }
                self.pos_slot(*slot)?;
                Ok(Type::Pos)
            }
            Expr::Param(slot, field) => match (self.params.get(*slot), field) {
                (Some(ParamKind::Value(t)), None) => Ok(*t),
                (Some(ParamKind::Record(r)), Some(f)) => match self.sig.records.get(*r) {
                    Some(rec) if *f < rec.fields.len() => Ok(rec.fields[*f].1.ty()),
                    _ => self.err("unknown record field"),
                },
                (Some(ParamKind::Record(_)), None) => {
                    self.err("record parameters must be accessed through a field")
                }
                (Some(ParamKind::Value(_)), Some(_)) => self.err("field access on a non-record"),
                (Some(ParamKind::Pos), _) => self.err("position parameter used as a value"),
                (None, _) => self.err(format!("unknown parameter #{slot}")),
            },
            Expr::Not(a) => {
                self.expect_bool(a)?;
                Ok(Type::Bool)
            }
            Expr::And(es) | Expr::Or(es) => {
                for a in es {
                    self.expect_bool(a)?;
                }
                Ok(Type::Bool)
            }
            Expr::Implies(a, b) => {
                self.expect_bool(a)?;
                self.expect_bool(b)?;
                Ok(Type::Bool)
            }
            Expr::Ite(c, a, b) => {
                self.expect_bool(c)?;
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                unify(ta, tb).ok_or_else(|| TypeError("branches of `if` differ in type".into()))
            }
            Expr::Cmp(op, a, b) => {
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                cmp_type(*op, ta, tb)
            }
            Expr::Arith(op, a, b) => {
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                arith_type(*op, ta, tb)
            }
            Expr::Member(a, b) => {
                let ta = self.infer(a)?;
                let tb = self.infer(b)?;
                member_type(ta, tb)
            }
            Expr::Quant(_, slot, body) => {
                if self.mode != Mode::Predicate {
                    return self.err("quantifiers are only allowed in predicate bodies");
                }
                if *slot != self.params.len() + self.bound.len() {
                    return self.err("quantifier slot out of sequence");
                }
                self.bound.push(*slot);
                let r = self.expect_bool(body);
                self.bound.pop();
                r?;
                Ok(Type::Bool)
            }
        }
    }

    fn expect_bool(&mut self, e: &Expr) -> Result<(), TypeError> {
        match self.infer(e)? {
            Type::Bool => Ok(()),
            t => self.err(format!("expected a boolean, found {}", describe(t))),
        }
    }
}

pub(crate) fn unify(a: Type, b: Type) -> Option<Type> {
    match (a, b) {
        (Type::EmptySet, Type::Set(t)) | (Type::Set(t), Type::EmptySet) => Some(Type::Set(t)),
        (a, b) if a == b => Some(a),
        _ => None,
    }
}

/// Human-readable type name for diagnostics.
pub(crate) fn describe(t: Type) -> &'static str {
    match t {
        Type::Bool => "boolean",
        Type::Int => "integer",
        Type::Enum(_) => "symbol",
        Type::Set(_) | Type::EmptySet => "set",
        Type::Pos => "position",
    }
}

pub(crate) fn cmp_type(op: CmpOp, a: Type, b: Type) -> Result<Type, TypeError> {
    match op {
        CmpOp::Eq | CmpOp::Ne if a.compatible(b) => Ok(Type::Bool),
        CmpOp::Eq | CmpOp::Ne => Err(TypeError(format!(
            "cannot compare {} with {}",
            describe(a),
            describe(b)
        ))),
        _ if a.is_numeric() && b.is_numeric() => Ok(Type::Bool),
        _ => Err(TypeError(format!(
            "`{}` needs integer or position operands, found {} and {}",
            op.symbol(),
            describe(a),
            describe(b)
        ))),
    }
}

pub(crate) fn arith_type(op: ArithOp, a: Type, b: Type) -> Result<Type, TypeError> {
    match (a, b) {
        (Type::Int, Type::Int) => Ok(Type::Int),
        (Type::Set(x), Type::Set(y)) if x == y => Ok(Type::Set(x)),
        (Type::Set(x), Type::EmptySet) | (Type::EmptySet, Type::Set(x)) => Ok(Type::Set(x)),
        _ => Err(TypeError(format!(
            "`{}` needs two integers or two sets of the same type, found {} and {}",
            if op == ArithOp::Add { "+" } else { "-" },
            describe(a),
            describe(b)
        ))),
    }
}

pub(crate) fn member_type(a: Type, b: Type) -> Result<Type, TypeError> {
    match (a, b) {
        (Type::Enum(x), Type::Set(y)) if x == y => Ok(Type::Bool),
        (Type::Enum(_), Type::EmptySet) => Ok(Type::Bool),
        _ => Err(TypeError(format!(
            "`in` needs a symbol and a set of its type, found {} and {}",
            describe(a),
            describe(b)
        ))),
    }
}

/// Runtime evaluation failure. These indicate a malformed model or an
/// environment that does not match the expression's mode.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unknown variable #{0}")]
    UnknownVariable(VarId),
    #[error("{0} is not available in this context")]
    NotAvailable(&'static str),
    #[error("position {pos} outside trace of {positions} positions")]
    PositionOutOfRange { pos: usize, positions: usize },
    #[error("integer overflow")]
    Overflow,
}

/// Supplies variable and parameter values to the evaluator. Methods return
/// `Ok(None)` for a value that is not yet known.
pub trait Env {
    fn cur(&self, _var: VarId) -> Result<Option<Value>, EvalError> {
        Err(EvalError::NotAvailable("current-state variable"))
    }

    fn next(&self, _var: VarId) -> Result<Option<Value>, EvalError> {
        Err(EvalError::NotAvailable("primed variable"))
    }

    fn at(&self, _var: VarId, _pos: usize) -> Result<Option<Value>, EvalError> {
        Err(EvalError::NotAvailable("positional access"))
    }

    /// Number of predicate parameters; quantifier slots follow them.
    fn param_count(&self) -> usize {
        0
    }

    fn param_pos(&self, _slot: usize) -> Result<usize, EvalError> {
        Err(EvalError::NotAvailable("position parameter"))
    }

    fn param_value(&self, _slot: usize, _field: Option<usize>) -> Result<Option<Value>, EvalError> {
        Err(EvalError::NotAvailable("value parameter"))
    }

    /// Last position a quantifier ranges over.
    fn horizon(&self) -> Result<usize, EvalError> {
        Err(EvalError::NotAvailable("quantifier"))
    }
}

/// Evaluates `expr` under `env`. `Ok(None)` means the result depends on
/// values the environment does not know yet.
pub fn eval(expr: &Expr, env: &impl Env) -> Result<Option<Value>, EvalError> {
    Evaluator {
        env,
        stack: Vec::new(),
    }
    .eval(expr)
}

struct Evaluator<'a, E> {
    env: &'a E,
    stack: Vec<usize>,
}

fn mismatch<T>(what: &str) -> Result<T, EvalError> {
    Err(EvalError::TypeMismatch(what.to_string()))
}

impl<E: Env> Evaluator<'_, E> {
    fn pos(&self, slot: usize) -> Result<usize, EvalError> {
        let n = self.env.param_count();
        if slot < n {
            self.env.param_pos(slot)
        } else {
            self.stack
                .get(slot - n)
                .copied()
                .ok_or(EvalError::NotAvailable("position slot"))
        }
    }

    fn bool(&mut self, e: &Expr) -> Result<Option<bool>, EvalError> {
        match self.eval(e)? {
            None => Ok(None),
            Some(Value::Bool(b)) => Ok(Some(b)),
            Some(_) => mismatch("expected a boolean"),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Option<Value>, EvalError> {
        match e {
            Expr::Lit(v, _) => Ok(Some(*v)),
            Expr::SetOf(_, elems) => {
                let mut mask = 0u64;
                let mut known = true;
                for el in elems {
                    match self.eval(el)? {
                        Some(Value::Sym(s)) => mask |= 1 << s,
                        Some(_) => return mismatch("set element is not a symbol"),
                        None => known = false,
                    }
                }
                Ok(known.then_some(Value::Set(mask)))
            }
            Expr::Var(v) => self.env.cur(*v),
            Expr::Next(v) => self.env.next(*v),
            Expr::At(v, slot) => {
                let p = self.pos(*slot)?;
                self.env.at(*v, p)
            }
            Expr::Pos(slot) => Ok(Some(Value::Int(self.pos(*slot)? as i64))),
            Expr::Param(slot, field) => self.env.param_value(*slot, *field),
            Expr::Not(a) => Ok(self.bool(a)?.map(|b| Value::Bool(!b))),
            Expr::And(es) => {
                let mut unknown = false;
                for a in es {
                    match self.bool(a)? {
                        Some(false) => return Ok(Some(Value::Bool(false))),
                        Some(true) => {}
                        None => unknown = true,
                    }
                }
                Ok((!unknown).then_some(Value::Bool(true)))
            }
            Expr::Or(es) => {
                let mut unknown = false;
                for a in es {
                    match self.bool(a)? {
                        Some(true) => return Ok(Some(Value::Bool(true))),
                        Some(false) => {}
                        None => unknown = true,
                    }
                }
                Ok((!unknown).then_some(Value::Bool(false)))
            }
            Expr::Implies(a, b) => {
                let l = self.bool(a)?;
                if l == Some(false) {
                    return Ok(Some(Value::Bool(true)));
                }
                let r = self.bool(b)?;
                Ok(match (l, r) {
                    (_, Some(true)) => Some(Value::Bool(true)),
                    (Some(true), Some(false)) => Some(Value::Bool(false)),
                    _ => None,
                })
            }
            Expr::Ite(c, a, b) => match self.bool(c)? {
                Some(true) => self.eval(a),
                Some(false) => self.eval(b),
                None => {
                    let x = self.eval(a)?;
                    let y = self.eval(b)?;
                    Ok(if x.is_some() && x == y { x } else { None })
                }
            },
            Expr::Cmp(op, a, b) => {
                let (Some(x), Some(y)) = (self.eval(a)?, self.eval(b)?) else {
                    return Ok(None);
                };
                compare(*op, x, y).map(|b| Some(Value::Bool(b)))
            }
            Expr::Arith(op, a, b) => {
                let (Some(x), Some(y)) = (self.eval(a)?, self.eval(b)?) else {
                    return Ok(None);
                };
                let v = match (op, x, y) {
                    (ArithOp::Add, Value::Int(i), Value::Int(j)) => {
                        Value::Int(i.checked_add(j).ok_or(EvalError::Overflow)?)
                    }
                    (ArithOp::Sub, Value::Int(i), Value::Int(j)) => {
                        Value::Int(i.checked_sub(j).ok_or(EvalError::Overflow)?)
                    }
                    (ArithOp::Add, Value::Set(m), Value::Set(n)) => Value::Set(m | n),
                    (ArithOp::Sub, Value::Set(m), Value::Set(n)) => Value::Set(m & !n),
                    _ => return mismatch("arithmetic operands"),
                };
                Ok(Some(v))
            }
            Expr::Member(a, b) => {
                let (Some(x), Some(y)) = (self.eval(a)?, self.eval(b)?) else {
                    return Ok(None);
                };
                match (x, y) {
                    (Value::Sym(s), Value::Set(m)) => Ok(Some(Value::Bool(m >> s & 1 == 1))),
                    _ => mismatch("membership operands"),
                }
            }
            Expr::Quant(kind, _, body) => {
                let horizon = self.env.horizon()?;
                let decisive = *kind == QuantKind::Some;
                let mut unknown = false;
                for p in 0..=horizon {
                    self.stack.push(p);
                    let r = self.bool(body);
                    self.stack.pop();
                    match r? {
                        Some(b) if b == decisive => return Ok(Some(Value::Bool(decisive))),
                        Some(_) => {}
                        None => unknown = true,
                    }
                }
                Ok((!unknown).then_some(Value::Bool(!decisive)))
            }
        }
    }
}

fn compare(op: CmpOp, x: Value, y: Value) -> Result<bool, EvalError> {
    match op {
        CmpOp::Eq | CmpOp::Ne => {
            if std::mem::discriminant(&x) != std::mem::discriminant(&y) {
                return mismatch("equality between values of different kinds");
            }
            Ok((x == y) == (op == CmpOp::Eq))
        }
        _ => {
            let (Value::Int(i), Value::Int(j)) = (x, y) else {
                return mismatch("ordering on non-integers");
            };
            Ok(match op {
                CmpOp::Lt => i < j,
                CmpOp::Le => i <= j,
                CmpOp::Gt => i > j,
                _ => i >= j,
            })
        }
    }
}

impl fmt::Display for QuantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuantKind::All => "all",
            QuantKind::Some => "some",
        })
    }
}
