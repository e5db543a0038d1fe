//! Predicate definitions and instantiation of a predicate set over a
//! concrete trace into the atomic facts that hold on it.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::kernel::{
    eval, Env, EvalError, Expr, ParamKind, Signature, State, Trace, Type, Value, VarId,
};

/// A declared parameter of a user-defined predicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

/// A named, typed, user-defined predicate. Quantifiers in the body range
/// over positions `0..=h`, where `h` is the largest position the fact's
/// arguments mention, so every fact is a property of a trace prefix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Expr,
}

impl PredicateDef {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// Shared handle to a predicate definition, compared by name.
#[derive(Clone, Debug)]
pub struct PredRef(pub Arc<PredicateDef>);

impl PredRef {
    pub fn name(&self) -> &str {
        &self.0.name
    }
}

impl PartialEq for PredRef {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}

impl Eq for PredRef {}

impl Hash for PredRef {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.name.hash(state)
    }
}

impl PartialOrd for PredRef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PredRef {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.name.cmp(&other.0.name)
    }
}

/// The fact family a built-in predicate generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinKind {
    /// `x@p = c` and `x@p = y@q`.
    Equality,
    /// `x@p != c` and `x@p != y@q`.
    Disequality,
    /// `i < j` between consecutive positions.
    Order,
    /// The always-true nullary predicate.
    Trivial,
}

impl BuiltinKind {
    pub fn keyword(self) -> &'static str {
        match self {
            BuiltinKind::Equality => "equality",
            BuiltinKind::Disequality => "disequality",
            BuiltinKind::Order => "order",
            BuiltinKind::Trivial => "trivial",
        }
    }
}

/// A built-in predicate, optionally restricted to some variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BuiltinDef {
    pub name: String,
    pub kind: BuiltinKind,
    /// Flat variables the predicate ranges over; `None` means all.
    pub scope: Option<Vec<VarId>>,
}

/// One member of a predicate set V.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PredicateEntry {
    Builtin(BuiltinDef),
    User(Arc<PredicateDef>),
}

impl PredicateEntry {
    pub fn name(&self) -> &str {
        match self {
            PredicateEntry::Builtin(b) => &b.name,
            PredicateEntry::User(p) => &p.name,
        }
    }
}

/// A predicate set V. An empty set behaves as `{true}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PredicateSet {
    pub entries: Vec<PredicateEntry>,
}

impl PredicateSet {
    pub fn new(entries: Vec<PredicateEntry>) -> Self {
        let mut set = PredicateSet::default();
        for e in entries {
            if !set.entries.iter().any(|x| x.name() == e.name()) {
                set.entries.push(e);
            }
        }
        set
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name()).collect()
    }

    pub fn user(&self, name: &str) -> Option<&Arc<PredicateDef>> {
        self.entries.iter().find_map(|e| match e {
            PredicateEntry::User(p) if p.name == name => Some(p),
            _ => None,
        })
    }

    pub fn has_kind(&self, kind: BuiltinKind) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e, PredicateEntry::Builtin(b) if b.kind == kind))
    }

    /// Applies the empty-set normalization.
    pub fn normalized(&self) -> PredicateSet {
        if self.entries.is_empty() {
            PredicateSet::new(vec![PredicateEntry::Builtin(BuiltinDef {
                name: "true".into(),
                kind: BuiltinKind::Trivial,
                scope: None,
            })])
        } else {
            self.clone()
        }
    }
}

/// A predicate argument. In a fact, `pos` is a trace index; in a trace
/// constraint it is a position-variable index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arg {
    Pos(usize),
    Var { var: VarId, pos: usize },
    Record { rec: usize, pos: usize },
}

impl Arg {
    pub fn pos(self) -> usize {
        match self {
            Arg::Pos(p) | Arg::Var { pos: p, .. } | Arg::Record { pos: p, .. } => p,
        }
    }

    fn with_pos(self, p: usize) -> Arg {
        match self {
            Arg::Pos(_) => Arg::Pos(p),
            Arg::Var { var, .. } => Arg::Var { var, pos: p },
            Arg::Record { rec, .. } => Arg::Record { rec, pos: p },
        }
    }
}

/// An indexed variable occurrence `var@pos`.
pub type Slot = (VarId, usize);

/// An atomic fact or atomic position fact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Pred { def: PredRef, args: Vec<Arg> },
    EqConst { var: VarId, pos: usize, value: Value },
    EqVars { a: Slot, b: Slot },
    NeqConst { var: VarId, pos: usize, value: Value },
    NeqVars { a: Slot, b: Slot },
    Less(usize, usize),
    True,
}

/// Deletion priority classes used by minimization; lower is tried first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    Position,
    UserPredicate,
    VarPair,
    Constant,
    Seed,
}

impl Atom {
    /// Positions (or position variables) the atom mentions.
    pub fn positions(&self) -> Vec<usize> {
        match self {
            Atom::Pred { args, .. } => args.iter().map(|a| a.pos()).collect(),
            Atom::EqConst { pos, .. } | Atom::NeqConst { pos, .. } => vec![*pos],
            Atom::EqVars { a, b } | Atom::NeqVars { a, b } => vec![a.1, b.1],
            Atom::Less(p, q) => vec![*p, *q],
            Atom::True => vec![],
        }
    }

    pub fn max_position(&self) -> Option<usize> {
        self.positions().into_iter().max()
    }

    /// Applies `f` to every position.
    pub fn map_positions(&self, f: impl Fn(usize) -> usize) -> Atom {
        match self {
            Atom::Pred { def, args } => Atom::Pred {
                def: def.clone(),
                args: args.iter().map(|a| a.with_pos(f(a.pos()))).collect(),
            },
            Atom::EqConst { var, pos, value } => Atom::EqConst {
                var: *var,
                pos: f(*pos),
                value: *value,
            },
            Atom::NeqConst { var, pos, value } => Atom::NeqConst {
                var: *var,
                pos: f(*pos),
                value: *value,
            },
            Atom::EqVars { a, b } => Atom::EqVars {
                a: (a.0, f(a.1)),
                b: (b.0, f(b.1)),
            },
            Atom::NeqVars { a, b } => Atom::NeqVars {
                a: (a.0, f(a.1)),
                b: (b.0, f(b.1)),
            },
            Atom::Less(p, q) => Atom::Less(f(*p), f(*q)),
            Atom::True => Atom::True,
        }
    }

    /// Puts symmetric atoms into a canonical orientation.
    pub fn oriented(self) -> Atom {
        match self {
            Atom::EqVars { a, b } if (b.1, b.0) < (a.1, a.0) => Atom::EqVars { a: b, b: a },
            Atom::NeqVars { a, b } if (b.1, b.0) < (a.1, a.0) => Atom::NeqVars { a: b, b: a },
            other => other,
        }
    }

    pub fn category(&self, seed: Option<&str>) -> Category {
        match self {
            Atom::Pred { def, .. } if Some(def.name()) == seed => Category::Seed,
            Atom::Pred { .. } => Category::UserPredicate,
            Atom::EqVars { .. } | Atom::NeqVars { .. } => Category::VarPair,
            Atom::EqConst { .. } | Atom::NeqConst { .. } => Category::Constant,
            Atom::Less(..) | Atom::True => Category::Position,
        }
    }

    /// Truth of the atom on `states`, reading positions as trace indices.
    pub fn eval(&self, sig: &Signature, states: &[State]) -> Result<bool, EvalError> {
        self.eval_mapped(sig, states, &|p| p)
    }

    /// Truth of the atom on `states` after sending every position through
    /// `map` (used to evaluate constraint conjuncts under a binding).
    pub fn eval_mapped(
        &self,
        sig: &Signature,
        states: &[State],
        map: &dyn Fn(usize) -> usize,
    ) -> Result<bool, EvalError> {
        let get = |var: VarId, pos: usize| -> Result<Value, EvalError> {
            let pos = map(pos);
            states
                .get(pos)
                .map(|s| s.get(var))
                .ok_or(EvalError::PositionOutOfRange {
                    pos,
                    positions: states.len(),
                })
        };
        Ok(match self {
            Atom::Pred { def, args } => {
                let args: Vec<Arg> = args.iter().map(|a| a.with_pos(map(a.pos()))).collect();
                let env = FactEnv {
                    sig,
                    states,
                    args: &args,
                };
                match eval(&def.0.body, &env)? {
                    Some(Value::Bool(b)) => b,
                    _ => return Err(EvalError::TypeMismatch("predicate body".into())),
                }
            }
            Atom::EqConst { var, pos, value } => get(*var, *pos)? == *value,
            Atom::NeqConst { var, pos, value } => get(*var, *pos)? != *value,
            Atom::EqVars { a, b } => get(a.0, a.1)? == get(b.0, b.1)?,
            Atom::NeqVars { a, b } => get(a.0, a.1)? != get(b.0, b.1)?,
            Atom::Less(p, q) => map(*p) < map(*q),
            Atom::True => true,
        })
    }

    /// Renders the atom, naming positions with `pos`.
    pub fn render(&self, sig: &Signature, pos: &dyn Fn(usize) -> String) -> String {
        let slot = |(v, p): Slot| format!("{}@{}", sig.vars[v].name, pos(p));
        match self {
            Atom::Pred { def, args } => {
                let args: Vec<String> = args
                    .iter()
                    .map(|a| match *a {
                        Arg::Pos(p) => pos(p),
                        Arg::Var { var, pos: p } => slot((var, p)),
                        Arg::Record { rec, pos: p } => {
                            format!("{}@{}", sig.record_vars[rec].name, pos(p))
                        }
                    })
                    .collect();
                format!("{}[{}]", def.name(), args.join(", "))
            }
            Atom::EqConst { var, pos: p, value } => {
                format!("{} = {}", slot((*var, *p)), sig.render(*var, *value))
            }
            Atom::NeqConst { var, pos: p, value } => {
                format!("{} != {}", slot((*var, *p)), sig.render(*var, *value))
            }
            Atom::EqVars { a, b } => format!("{} = {}", slot(*a), slot(*b)),
            Atom::NeqVars { a, b } => format!("{} != {}", slot(*a), slot(*b)),
            Atom::Less(p, q) => format!("{} < {}", pos(*p), pos(*q)),
            Atom::True => "true".to_string(),
        }
    }

    /// Display rank: predicates, constant facts, variable-pair facts,
    /// position facts, `true`.
    pub(crate) fn display_rank(&self) -> u8 {
        match self {
            Atom::Pred { .. } => 0,
            Atom::EqConst { .. } | Atom::NeqConst { .. } => 1,
            Atom::EqVars { .. } | Atom::NeqVars { .. } => 2,
            Atom::Less(..) => 3,
            Atom::True => 4,
        }
    }
}

/// Evaluation environment for a predicate body under concrete arguments.
struct FactEnv<'a> {
    sig: &'a Signature,
    states: &'a [State],
    args: &'a [Arg],
}

impl FactEnv<'_> {
    fn value(&self, var: VarId, pos: usize) -> Result<Option<Value>, EvalError> {
        self.states
            .get(pos)
            .map(|s| Some(s.get(var)))
            .ok_or(EvalError::PositionOutOfRange {
                pos,
                positions: self.states.len(),
            })
    }
}

impl Env for FactEnv<'_> {
    fn at(&self, var: VarId, pos: usize) -> Result<Option<Value>, EvalError> {
        self.value(var, pos)
    }

    fn param_count(&self) -> usize {
        self.args.len()
    }

    fn param_pos(&self, slot: usize) -> Result<usize, EvalError> {
        match self.args.get(slot) {
            Some(Arg::Pos(p)) => Ok(*p),
            _ => Err(EvalError::NotAvailable("position parameter")),
        }
    }

    fn param_value(&self, slot: usize, field: Option<usize>) -> Result<Option<Value>, EvalError> {
        match (self.args.get(slot), field) {
            (Some(Arg::Var { var, pos }), None) => self.value(*var, *pos),
            (Some(Arg::Record { rec, pos }), Some(f)) => {
                let var = *self.sig.record_vars[*rec]
                    .fields
                    .get(f)
                    .ok_or(EvalError::NotAvailable("record field"))?;
                self.value(var, *pos)
            }
            _ => Err(EvalError::NotAvailable("value parameter")),
        }
    }

    fn horizon(&self) -> Result<usize, EvalError> {
        self.args
            .iter()
            .map(|a| a.pos())
            .max()
            .ok_or(EvalError::NotAvailable("quantifier without positional arguments"))
    }
}

/// Whether `args` typechecks against the parameters of `pred`.
pub fn typecheck(sig: &Signature, pred: &PredicateDef, args: &[Arg]) -> bool {
    pred.params.len() == args.len()
        && pred.params.iter().zip(args).all(|(p, a)| match (p.kind, *a) {
            (ParamKind::Pos, Arg::Pos(_)) => true,
            (ParamKind::Value(t), Arg::Var { var, .. }) => {
                var < sig.vars.len() && sig.var_type(var) == t
            }
            (ParamKind::Record(r), Arg::Record { rec, .. }) => {
                sig.record_vars.get(rec).is_some_and(|rv| rv.record == r)
            }
            _ => false,
        })
}

/// Evaluates a fact on a trace. Positions must lie within the trace.
pub fn eval_fact(sig: &Signature, fact: &Atom, trace: &Trace) -> Result<bool, EvalError> {
    fact.eval(sig, trace.states())
}

/// Limits on fact generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactConfig {
    /// Predicates with more parameters than this are not instantiated.
    pub max_arity: usize,
    /// Largest position distance (exclusive) for variable-pair facts;
    /// `None` is unlimited.
    pub eq_window: Option<usize>,
}

impl Default for FactConfig {
    fn default() -> Self {
        FactConfig {
            max_arity: 3,
            eq_window: Some(12),
        }
    }
}

/// The set Γ of facts that hold on a trace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactSet {
    pub facts: Vec<Atom>,
    pub positions_used: BTreeSet<usize>,
    /// Whether a configured limit suppressed any candidate fact.
    pub capped: bool,
}

impl FactSet {
    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    fn push(&mut self, atom: Atom) {
        if !self.facts.contains(&atom) {
            self.positions_used.extend(atom.positions());
            self.facts.push(atom);
        }
    }
}

fn scope_vars(sig: &Signature, scope: &Option<Vec<VarId>>) -> Vec<VarId> {
    match scope {
        Some(vs) => vs.clone(),
        None => (0..sig.vars.len()).collect(),
    }
}

fn other_values(sig: &Signature, var: VarId, seen: Value) -> Vec<Value> {
    sig.types
        .values(sig.vars[var].domain)
        .into_iter()
        .filter(|v| *v != seen)
        .collect()
}

/// All variable-pair slots of equal type within the window, oriented by
/// `(pos, var)`, in that order.
fn slot_pairs(
    sig: &Signature,
    vars: &[VarId],
    positions: usize,
    window: Option<usize>,
    capped: &mut bool,
) -> Vec<(Slot, Slot)> {
    let mut slots: Vec<(usize, VarId)> = Vec::new();
    for p in 0..positions {
        for &v in vars {
            slots.push((p, v));
        }
    }
    let mut out = Vec::new();
    for (i, &(p, v)) in slots.iter().enumerate() {
        for &(q, w) in &slots[i + 1..] {
            if sig.var_type(v) != sig.var_type(w) {
                continue;
            }
            if let Some(win) = window {
                if q - p >= win {
                    *capped = true;
                    continue;
                }
            }
            out.push(((v, p), (w, q)));
        }
    }
    out
}

/// Candidate arguments for one parameter over a trace of `positions`.
fn candidates(sig: &Signature, kind: ParamKind, positions: usize) -> Vec<Arg> {
    let mut out = Vec::new();
    match kind {
        ParamKind::Pos => out.extend((0..positions).map(Arg::Pos)),
        ParamKind::Value(t) => {
            for (var, d) in sig.vars.iter().enumerate() {
                if d.domain.ty() == t {
                    out.extend((0..positions).map(|pos| Arg::Var { var, pos }));
                }
            }
        }
        ParamKind::Record(r) => {
            for (rec, rv) in sig.record_vars.iter().enumerate() {
                if rv.record == r {
                    out.extend((0..positions).map(|pos| Arg::Record { rec, pos }));
                }
            }
        }
    }
    out
}

/// Instantiates every member of `preds` over `trace` and keeps the true
/// instances, in predicate-set order.
pub fn facts(
    sig: &Signature,
    trace: &Trace,
    preds: &PredicateSet,
    cfg: &FactConfig,
) -> Result<FactSet, EvalError> {
    let preds = preds.normalized();
    let states = trace.states();
    let n = states.len();
    let mut out = FactSet::default();
    for entry in &preds.entries {
        match entry {
            PredicateEntry::Builtin(b) => {
                let vars = scope_vars(sig, &b.scope);
                match b.kind {
                    BuiltinKind::Equality => {
                        for &v in &vars {
                            for p in 0..n {
                                out.push(Atom::EqConst {
                                    var: v,
                                    pos: p,
                                    value: trace.value(v, p),
                                });
                            }
                        }
                        let mut capped = false;
                        for (a, b) in slot_pairs(sig, &vars, n, cfg.eq_window, &mut capped) {
                            if trace.value(a.0, a.1) == trace.value(b.0, b.1) {
                                out.push(Atom::EqVars { a, b });
                            }
                        }
                        out.capped |= capped;
                    }
                    BuiltinKind::Disequality => {
                        for &v in &vars {
                            for p in 0..n {
                                let seen = trace.value(v, p);
                                for value in other_values(sig, v, seen) {
                                    out.push(Atom::NeqConst { var: v, pos: p, value });
                                }
                            }
                        }
                        let mut capped = false;
                        for (a, b) in slot_pairs(sig, &vars, n, cfg.eq_window, &mut capped) {
                            if trace.value(a.0, a.1) != trace.value(b.0, b.1) {
                                out.push(Atom::NeqVars { a, b });
                            }
                        }
                        out.capped |= capped;
                    }
                    BuiltinKind::Order => {
                        for p in 1..n {
                            out.push(Atom::Less(p - 1, p));
                        }
                    }
                    BuiltinKind::Trivial => out.push(Atom::True),
                }
            }
            PredicateEntry::User(def) => {
                if def.arity() > cfg.max_arity {
                    out.capped = true;
                    continue;
                }
                let pools: Vec<Vec<Arg>> = def
                    .params
                    .iter()
                    .map(|p| candidates(sig, p.kind, n))
                    .collect();
                let pred = PredRef(def.clone());
                let mut args = Vec::with_capacity(pools.len());
                instantiate(sig, &pred, states, &pools, &mut args, &mut out)?;
            }
        }
    }
    Ok(out)
}

fn instantiate(
    sig: &Signature,
    pred: &PredRef,
    states: &[State],
    pools: &[Vec<Arg>],
    args: &mut Vec<Arg>,
    out: &mut FactSet,
) -> Result<(), EvalError> {
    if args.len() == pools.len() {
        let atom = Atom::Pred {
            def: pred.clone(),
            args: args.clone(),
        };
        if atom.eval(sig, states)? {
            out.push(atom);
        }
        return Ok(());
    }
    for a in &pools[args.len()] {
        args.push(*a);
        instantiate(sig, pred, states, pools, args, out)?;
        args.pop();
    }
    Ok(())
}

/// Whether `ty` is a type a value parameter may take.
pub fn is_value_type(ty: Type) -> bool {
    matches!(ty, Type::Bool | Type::Int | Type::Enum(_) | Type::Set(_))
}

impl fmt::Display for BuiltinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{CmpOp, Domain};

    fn counter() -> (Signature, PredicateSet) {
        let mut sig = Signature::new();
        sig.add_var("a", Domain::Int { lo: -3, hi: 3 }).unwrap();
        let lt1 = PredicateDef {
            name: "lessThanOne".into(),
            params: vec![Param {
                name: "x".into(),
                kind: ParamKind::Value(Type::Int),
            }],
            body: Expr::cmp(CmpOp::Lt, Expr::Param(0, None), Expr::int(1)),
        };
        let gt1 = PredicateDef {
            name: "greaterThanOne".into(),
            params: lt1.params.clone(),
            body: Expr::cmp(CmpOp::Gt, Expr::Param(0, None), Expr::int(1)),
        };
        let set = PredicateSet::new(vec![
            PredicateEntry::User(Arc::new(lt1)),
            PredicateEntry::User(Arc::new(gt1)),
        ]);
        (sig, set)
    }

    fn trace(vals: &[i64]) -> Trace {
        Trace::new(vals.iter().map(|v| State::new(vec![Value::Int(*v)])).collect()).unwrap()
    }

    #[test]
    fn single_fact_for_decrement() {
        let (sig, v) = counter();
        let g = facts(&sig, &trace(&[1, 0]), &v, &FactConfig::default()).unwrap();
        assert_eq!(g.len(), 1);
        let r = g.facts[0].render(&sig, &|p| p.to_string());
        assert_eq!(r, "lessThanOne[a@1]");
    }

    #[test]
    fn order_facts_are_consecutive() {
        let (sig, v) = counter();
        let mut entries = vec![v.entries[0].clone()];
        entries.push(PredicateEntry::Builtin(BuiltinDef {
            name: "lt".into(),
            kind: BuiltinKind::Order,
            scope: None,
        }));
        let g = facts(&sig, &trace(&[1, 0]), &PredicateSet::new(entries), &FactConfig::default())
            .unwrap();
        assert_eq!(g.facts.len(), 2);
        assert_eq!(g.facts[1], Atom::Less(0, 1));
        let g3 = facts(
            &sig,
            &trace(&[1, 1, 1]),
            &PredicateSet::new(vec![PredicateEntry::Builtin(BuiltinDef {
                name: "lt".into(),
                kind: BuiltinKind::Order,
                scope: None,
            })]),
            &FactConfig::default(),
        )
        .unwrap();
        assert_eq!(g3.facts, vec![Atom::Less(0, 1), Atom::Less(1, 2)]);
    }

    #[test]
    fn empty_gamma_on_initial_state() {
        let (sig, v) = counter();
        let only_gt = PredicateSet::new(vec![v.entries[1].clone()]);
        let g = facts(&sig, &trace(&[1]), &only_gt, &FactConfig::default()).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn empty_set_normalizes_to_true() {
        let (sig, _) = counter();
        let g = facts(&sig, &trace(&[1]), &PredicateSet::default(), &FactConfig::default())
            .unwrap();
        assert_eq!(g.facts, vec![Atom::True]);
    }

    #[test]
    fn window_caps_pairs() {
        let (sig, _) = counter();
        let eq = PredicateSet::new(vec![PredicateEntry::Builtin(BuiltinDef {
            name: "eq".into(),
            kind: BuiltinKind::Equality,
            scope: None,
        })]);
        let cfg = FactConfig {
            max_arity: 3,
            eq_window: Some(1),
        };
        let g = facts(&sig, &trace(&[1, 1]), &eq, &cfg).unwrap();
        assert!(g.capped);
        assert!(!g.facts.iter().any(|f| matches!(f, Atom::EqVars { .. })));
        let g = facts(&sig, &trace(&[1, 1]), &eq, &FactConfig::default()).unwrap();
        assert!(!g.capped);
        assert!(g.facts.contains(&Atom::EqVars { a: (0, 0), b: (0, 1) }));
    }

    #[test]
    fn typecheck_rejects_wrong_kind() {
        let (sig, v) = counter();
        let p = v.user("lessThanOne").unwrap();
        assert!(typecheck(&sig, p, &[Arg::Var { var: 0, pos: 1 }]));
        assert!(!typecheck(&sig, p, &[Arg::Pos(1)]));
        assert!(!typecheck(&sig, p, &[]));
    }
}
