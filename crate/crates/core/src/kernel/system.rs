//! Signatures, states, traces, transition systems and properties.

use std::fmt;
use std::sync::Arc;

use super::domain::{Domain, Type, Types, Value};
use super::expr::{eval, Env, EvalError, Expr, VarId};
use super::KernelError;

/// Index of a record type in a [`Signature`].
pub type RecordId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub domain: Domain,
}

/// A record type; variables of this type expand to one flat variable per
/// field, named `var.field`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordType {
    pub name: String,
    pub fields: Vec<(String, Domain)>,
}

/// A record-typed variable and the flat variables holding its fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordVar {
    pub name: String,
    pub record: RecordId,
    pub fields: Vec<VarId>,
}

/// Types and state variables of a model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub types: Types,
    pub records: Vec<RecordType>,
    pub vars: Vec<VarDecl>,
    pub record_vars: Vec<RecordVar>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    fn name_taken(&self, name: &str) -> bool {
        self.var(name).is_some() || self.record_var(name).is_some()
    }

    pub fn add_var(&mut self, name: &str, domain: Domain) -> Result<VarId, KernelError> {
        self.types.validate(domain)?;
        if self.name_taken(name) {
            return Err(KernelError::Duplicate(format!("variable `{name}`")));
        }
        self.vars.push(VarDecl {
            name: name.to_string(),
            domain,
        });
        Ok(self.vars.len() - 1)
    }

    pub fn add_record(
        &mut self,
        name: &str,
        fields: Vec<(String, Domain)>,
    ) -> Result<RecordId, KernelError> {
        if self.record(name).is_some() || self.types.lookup(name).is_some() {
            return Err(KernelError::Duplicate(format!("type `{name}`")));
        }
        for (i, (f, d)) in fields.iter().enumerate() {
            self.types.validate(*d)?;
            if fields[..i].iter().any(|(g, _)| g == f) {
                return Err(KernelError::Duplicate(format!("field `{f}` in record `{name}`")));
            }
        }
        self.records.push(RecordType {
            name: name.to_string(),
            fields,
        });
        Ok(self.records.len() - 1)
    }

    /// Declares a record-typed variable, creating its flat field variables.
    pub fn add_record_var(&mut self, name: &str, record: RecordId) -> Result<usize, KernelError> {
        if self.name_taken(name) {
            return Err(KernelError::Duplicate(format!("variable `{name}`")));
        }
        let fields = self.records[record].fields.clone();
        let mut ids = Vec::with_capacity(fields.len());
        for (f, d) in fields {
            ids.push(self.add_var(&format!("{name}.{f}"), d)?);
        }
        self.record_vars.push(RecordVar {
            name: name.to_string(),
            record,
            fields: ids,
        });
        Ok(self.record_vars.len() - 1)
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn record(&self, name: &str) -> Option<RecordId> {
        self.records.iter().position(|r| r.name == name)
    }

    pub fn record_var(&self, name: &str) -> Option<usize> {
        self.record_vars.iter().position(|r| r.name == name)
    }

    pub fn var_type(&self, v: VarId) -> Type {
        self.vars[v].domain.ty()
    }

    /// Renders a value of variable `v` in model syntax.
    pub fn render(&self, v: VarId, value: Value) -> String {
        self.types.render(self.var_type(v), value)
    }

    /// Checks that `values` is a total, in-domain assignment.
    pub fn check_state(&self, values: &[Value]) -> Result<(), KernelError> {
        if values.len() != self.vars.len() {
            return Err(KernelError::Arity {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        for (d, v) in self.vars.iter().zip(values) {
            if !self.types.contains(d.domain, *v) {
                return Err(KernelError::OutOfDomain {
                    var: d.name.clone(),
                    value: v.to_string(),
                });
            }
        }
        Ok(())
    }
}

/// A total assignment of values to the state variables, in declaration
/// order. The derived ordering is the canonical (lexicographic) state order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Arc<[Value]>);

impl State {
    pub fn new(values: Vec<Value>) -> Self {
        State(values.into())
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, v: VarId) -> Value {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Renders the state as `(x=1, y=true)`.
    pub fn render(&self, sig: &Signature) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{}={}", sig.vars[i].name, sig.render(i, *v)))
            .collect();
        format!("({})", parts.join(", "))
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Env for State {
    fn cur(&self, var: VarId) -> Result<Option<Value>, EvalError> {
        self.0
            .get(var)
            .map(|v| Some(*v))
            .ok_or(EvalError::UnknownVariable(var))
    }
}

/// A state under construction: unassigned variables evaluate to unknown.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialState(pub Vec<Option<Value>>);

impl Env for PartialState {
    fn cur(&self, var: VarId) -> Result<Option<Value>, EvalError> {
        self.0.get(var).copied().ok_or(EvalError::UnknownVariable(var))
    }
}

/// Environment for a transition whose successor may be partially assigned.
pub(crate) struct StepEnv<'a> {
    pub cur: &'a [Value],
    pub next: &'a [Option<Value>],
}

impl Env for StepEnv<'_> {
    fn cur(&self, var: VarId) -> Result<Option<Value>, EvalError> {
        self.cur
            .get(var)
            .map(|v| Some(*v))
            .ok_or(EvalError::UnknownVariable(var))
    }

    fn next(&self, var: VarId) -> Result<Option<Value>, EvalError> {
        self.next.get(var).copied().ok_or(EvalError::UnknownVariable(var))
    }
}

/// A finite, non-empty sequence of states. Its length is the number of
/// transitions, one less than the number of states.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    states: Vec<State>,
}

impl Trace {
    pub fn new(states: Vec<State>) -> Result<Self, KernelError> {
        if states.is_empty() {
            return Err(KernelError::EmptyTrace);
        }
        Ok(Trace { states })
    }

    pub(crate) fn from_states_unchecked(states: Vec<State>) -> Self {
        debug_assert!(!states.is_empty());
        Trace { states }
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.states.len() - 1
    }

    /// Always false; a trace has at least one state.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of positions, `len() + 1`.
    pub fn positions(&self) -> usize {
        self.states.len()
    }

    pub fn value(&self, var: VarId, pos: usize) -> Value {
        self.states[pos].get(var)
    }

    /// A new trace with `extra` appended.
    pub fn extended(&self, extra: &[State]) -> Trace {
        let mut states = self.states.clone();
        states.extend_from_slice(extra);
        Trace { states }
    }

    pub fn render(&self, sig: &Signature) -> String {
        self.states
            .iter()
            .map(|s| s.render(sig))
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.states.iter()).finish()
    }
}

/// An invariant property `G expr`, or its negation. A trace satisfies the
/// invariant iff every state satisfies `expr`; it satisfies the negation iff
/// some state does not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Property {
    pub name: String,
    pub expr: Expr,
    pub negated: bool,
}

impl Property {
    pub fn invariant(name: &str, expr: Expr) -> Self {
        Property {
            name: name.to_string(),
            expr,
            negated: false,
        }
    }

    /// The property satisfied by exactly the traces that violate `self`.
    pub fn negate(&self) -> Self {
        Property {
            name: self.name.clone(),
            expr: self.expr.clone(),
            negated: !self.negated,
        }
    }

    /// Whether a single state satisfies the invariant expression.
    pub fn state_ok(&self, s: &State) -> Result<bool, EvalError> {
        expect_bool(eval(&self.expr, s)?)
    }
}

fn expect_bool(v: Option<Value>) -> Result<bool, EvalError> {
    match v {
        Some(Value::Bool(b)) => Ok(b),
        Some(_) => Err(EvalError::TypeMismatch("expected a boolean".into())),
        None => Err(EvalError::NotAvailable("unassigned variable")),
    }
}

/// A symbolic transition system `(X, I, T)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicTransitionSystem {
    pub sig: Signature,
    pub init: Expr,
    pub trans: Expr,
}

impl SymbolicTransitionSystem {
    pub fn is_initial(&self, s: &State) -> Result<bool, EvalError> {
        expect_bool(eval(&self.init, s)?)
    }

    pub fn is_step(&self, s: &State, t: &State) -> Result<bool, EvalError> {
        eval_transition(&self.trans, s, t)
    }

    /// Whether `trace` starts in an initial state and every step satisfies
    /// the transition predicate.
    pub fn accepts(&self, trace: &Trace) -> Result<bool, EvalError> {
        if !self.is_initial(&trace.states()[0])? {
            return Ok(false);
        }
        for w in trace.states().windows(2) {
            if !self.is_step(&w[0], &w[1])? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Evaluates a state expression on a complete state.
pub fn eval_state(expr: &Expr, s: &State) -> Result<Value, EvalError> {
    eval(expr, s)?.ok_or(EvalError::NotAvailable("unassigned variable"))
}

/// Evaluates a transition predicate on a pair of complete states.
pub fn eval_transition(expr: &Expr, s: &State, next: &State) -> Result<bool, EvalError> {
    let next: Vec<Option<Value>> = next.values().iter().map(|v| Some(*v)).collect();
    let env = StepEnv {
        cur: s.values(),
        next: &next,
    };
    expect_bool(eval(expr, &env)?)
}

/// Whether every state of `trace` satisfies `prop` (or, for a negated
/// property, some state does not satisfy the invariant).
pub fn trace_satisfies_property(trace: &Trace, prop: &Property) -> Result<bool, EvalError> {
    let mut all = true;
    for s in trace.states() {
        if !prop.state_ok(s)? {
            all = false;
            break;
        }
    }
    Ok(all != prop.negated)
}
