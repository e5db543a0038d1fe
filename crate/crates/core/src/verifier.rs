//! Deterministic bounded explicit-state verifier.
//!
//! Traces are explored depth-first with successors in canonical order
//! (variables in declaration order, values in domain order). Searches
//! report the first witness in canonical trace order: shorter traces first,
//! ties broken lexicographically on states.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::kernel::{
    eval, EvalError, PartialState, Property, State, SymbolicTransitionSystem, Trace, Value,
};
use crate::kernel::system::StepEnv;
use crate::tracecon::TraceConstraint;

/// Search bound on the number of transitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bound {
    pub max_len: usize,
    /// Only traces of length exactly `max_len` count.
    pub exact: bool,
}

impl Bound {
    pub fn upto(max_len: usize) -> Self {
        Bound {
            max_len,
            exact: false,
        }
    }

    pub fn exact(max_len: usize) -> Self {
        Bound {
            max_len,
            exact: true,
        }
    }

    fn admits(self, len: usize) -> bool {
        if self.exact {
            len == self.max_len
        } else {
            len <= self.max_len
        }
    }
}

/// Assumptions on the traces a search considers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    /// Every one of these must be satisfied.
    pub required: Vec<TraceConstraint>,
    /// If non-empty, at least one of these must be satisfied.
    pub required_any: Vec<TraceConstraint>,
    /// None of these may be satisfied.
    pub blocked: Vec<TraceConstraint>,
}

impl ConstraintSet {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn requiring(w: TraceConstraint) -> Self {
        ConstraintSet {
            required: vec![w],
            ..Self::default()
        }
    }

    pub fn blocking(ws: Vec<TraceConstraint>) -> Self {
        ConstraintSet {
            blocked: ws,
            ..Self::default()
        }
    }

    /// Whether a complete trace meets the assumptions.
    pub fn admits(
        &self,
        sig: &crate::kernel::Signature,
        trace: &Trace,
    ) -> Result<bool, EvalError> {
        let states = trace.states();
        for w in &self.blocked {
            if w.satisfied_by(sig, states)? {
                return Ok(false);
            }
        }
        for w in &self.required {
            if !w.satisfied_by(sig, states)? {
                return Ok(false);
            }
        }
        if self.required_any.is_empty() {
            return Ok(true);
        }
        for w in &self.required_any {
            if w.satisfied_by(sig, states)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifyOutcome {
    /// Every admitted trace satisfies the property.
    Ok,
    /// The first admitted trace that does not.
    Violated(Trace),
}

impl VerifyOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, VerifyOutcome::Ok)
    }

    pub fn witness(self) -> Option<Trace> {
        match self {
            VerifyOutcome::Ok => None,
            VerifyOutcome::Violated(t) => Some(t),
        }
    }
}

/// A verifier for one transition system. Successor sets are cached, so a
/// verifier should be reused across the queries of one classification.
pub struct Verifier<'a> {
    sts: &'a SymbolicTransitionSystem,
    initial: RefCell<Option<Arc<[State]>>>,
    successors: RefCell<HashMap<State, Arc<[State]>>>,
    spent: Cell<Duration>,
    queries: Cell<usize>,
}

impl<'a> Verifier<'a> {
    pub fn new(sts: &'a SymbolicTransitionSystem) -> Self {
        Verifier {
            sts,
            initial: RefCell::new(None),
            successors: RefCell::new(HashMap::new()),
            spent: Cell::new(Duration::ZERO),
            queries: Cell::new(0),
        }
    }

    pub fn system(&self) -> &SymbolicTransitionSystem {
        self.sts
    }

    /// Total time spent inside verifier queries.
    pub fn time_spent(&self) -> Duration {
        self.spent.get()
    }

    /// Number of verify/enumerate/count queries answered.
    pub fn queries(&self) -> usize {
        self.queries.get()
    }

    fn timed<T>(&self, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.spent.set(self.spent.get() + start.elapsed());
        self.queries.set(self.queries.get() + 1);
        out
    }

    /// Initial states in canonical order.
    pub fn initial_states(&self) -> Result<Arc<[State]>, EvalError> {
        if let Some(s) = self.initial.borrow().as_ref() {
            return Ok(s.clone());
        }
        let sig = &self.sts.sig;
        let mut partial = PartialState(vec![None; sig.vars.len()]);
        let mut out = Vec::new();
        self.assign_initial(0, &mut partial, &mut out)?;
        let out: Arc<[State]> = out.into();
        *self.initial.borrow_mut() = Some(out.clone());
        Ok(out)
    }

    fn assign_initial(
        &self,
        var: usize,
        partial: &mut PartialState,
        out: &mut Vec<State>,
    ) -> Result<(), EvalError> {
        let sig = &self.sts.sig;
        if var == sig.vars.len() {
            if eval(&self.sts.init, partial)? == Some(Value::Bool(true)) {
                out.push(State::new(partial.0.iter().map(|v| v.unwrap()).collect()));
            }
            return Ok(());
        }
        for v in sig.types.values(sig.vars[var].domain) {
            partial.0[var] = Some(v);
            if eval(&self.sts.init, partial)? != Some(Value::Bool(false)) {
                self.assign_initial(var + 1, partial, out)?;
            }
        }
        partial.0[var] = None;
        Ok(())
    }

    /// Successors of `s` in canonical order.
    pub fn successors(&self, s: &State) -> Result<Arc<[State]>, EvalError> {
        if let Some(succ) = self.successors.borrow().get(s) {
            return Ok(succ.clone());
        }
        let n = self.sts.sig.vars.len();
        let mut next = vec![None; n];
        let mut out = Vec::new();
        self.assign_next(s.values(), 0, &mut next, &mut out)?;
        let out: Arc<[State]> = out.into();
        self.successors.borrow_mut().insert(s.clone(), out.clone());
        Ok(out)
    }

    fn assign_next(
        &self,
        cur: &[Value],
        var: usize,
        next: &mut Vec<Option<Value>>,
        out: &mut Vec<State>,
    ) -> Result<(), EvalError> {
        let sig = &self.sts.sig;
        if var == sig.vars.len() {
            let env = StepEnv { cur, next };
            if eval(&self.sts.trans, &env)? == Some(Value::Bool(true)) {
                out.push(State::new(next.iter().map(|v| v.unwrap()).collect()));
            }
            return Ok(());
        }
        for v in sig.types.values(sig.vars[var].domain) {
            next[var] = Some(v);
            let env = StepEnv { cur, next };
            if eval(&self.sts.trans, &env)? != Some(Value::Bool(false)) {
                self.assign_next(cur, var + 1, next, out)?;
            }
        }
        next[var] = None;
        Ok(())
    }

    /// All traces of the system within `bound` that meet `assume`, in
    /// canonical order.
    pub fn enumerate_traces(
        &self,
        assume: &ConstraintSet,
        bound: Bound,
    ) -> Result<Vec<Trace>, EvalError> {
        self.timed(|| {
            let mut out = Vec::new();
            let lengths = if bound.exact {
                bound.max_len..=bound.max_len
            } else {
                0..=bound.max_len
            };
            for len in lengths {
                let mut path = Vec::new();
                for s in self.initial_states()?.iter() {
                    path.push(s.clone());
                    self.collect(assume, len, &mut path, &mut out)?;
                    path.pop();
                }
            }
            Ok(out)
        })
    }

    fn collect(
        &self,
        assume: &ConstraintSet,
        len: usize,
        path: &mut Vec<State>,
        out: &mut Vec<Trace>,
    ) -> Result<(), EvalError> {
        let sig = &self.sts.sig;
        for w in &assume.blocked {
            if w.satisfied_by(sig, path)? {
                return Ok(());
            }
        }
        if path.len() == len + 1 {
            let t = Trace::from_states_unchecked(path.clone());
            if assume.admits(sig, &t)? {
                out.push(t);
            }
            return Ok(());
        }
        let last = path.last().expect("non-empty path").clone();
        for s in self.successors(&last)?.iter() {
            path.push(s.clone());
            self.collect(assume, len, path, out)?;
            path.pop();
        }
        Ok(())
    }

    /// Checks that every admitted trace within `bound` satisfies `prop`.
    pub fn verify(
        &self,
        assume: &ConstraintSet,
        prop: &Property,
        bound: Bound,
    ) -> Result<VerifyOutcome, EvalError> {
        self.timed(|| {
            let mut search = Search {
                verifier: self,
                assume,
                prop,
                bound,
                limit: bound.max_len,
                best: None,
                done: false,
                path: Vec::new(),
            };
            let init = self.initial_states()?;
            let req = vec![false; assume.required.len()];
            for s in init.iter() {
                search.path.push(s.clone());
                search.node(false, &req, false)?;
                search.path.pop();
                if search.done {
                    break;
                }
            }
            Ok(match search.best {
                Some(states) => VerifyOutcome::Violated(Trace::from_states_unchecked(states)),
                None => VerifyOutcome::Ok,
            })
        })
    }

    /// The first admitted trace violating `prop`, if any.
    pub fn counterexample(
        &self,
        assume: &ConstraintSet,
        prop: &Property,
        bound: Bound,
    ) -> Result<Option<Trace>, EvalError> {
        Ok(self.verify(assume, prop, bound)?.witness())
    }

    /// Exact number of traces within `bound` that violate `prop`.
    pub fn count_counterexamples(&self, prop: &Property, bound: Bound) -> Result<u64, EvalError> {
        self.timed(|| {
            let mut memo: HashMap<(State, usize), (u64, u64)> = HashMap::new();
            let mut total = 0u64;
            for s in self.initial_states()?.iter() {
                let (all, good) = self.count_from(s, bound.max_len, bound.exact, prop, &mut memo)?;
                let bad = all - good;
                total = total.saturating_add(if prop.negated { good } else { bad });
            }
            Ok(total)
        })
    }

    /// `(all, good)` trace counts from `s` with `rem` steps left, where
    /// good traces have every state satisfying the invariant.
    fn count_from(
        &self,
        s: &State,
        rem: usize,
        exact: bool,
        prop: &Property,
        memo: &mut HashMap<(State, usize), (u64, u64)>,
    ) -> Result<(u64, u64), EvalError> {
        if let Some(r) = memo.get(&(s.clone(), rem)) {
            return Ok(*r);
        }
        let ok = prop.state_ok(s)?;
        let here = u64::from(!exact || rem == 0);
        let (mut all, mut good) = (here, if ok { here } else { 0 });
        if rem > 0 {
            for t in self.successors(s)?.iter() {
                let (a, g) = self.count_from(t, rem - 1, exact, prop, memo)?;
                all = all.saturating_add(a);
                if ok {
                    good = good.saturating_add(g);
                }
            }
        }
        memo.insert((s.clone(), rem), (all, good));
        Ok((all, good))
    }
}

struct Search<'s, 'a> {
    verifier: &'s Verifier<'a>,
    assume: &'s ConstraintSet,
    prop: &'s Property,
    bound: Bound,
    /// Deepest length still worth exploring; shrinks as witnesses are found.
    limit: usize,
    best: Option<Vec<State>>,
    done: bool,
    path: Vec<State>,
}

impl Search<'_, '_> {
    fn node(&mut self, parent_bad: bool, parent_req: &[bool], parent_any: bool) -> Result<(), EvalError> {
        let sig = &self.verifier.sts.sig;
        let s = self.path.last().expect("non-empty path");
        let bad = parent_bad || !self.prop.state_ok(s)?;
        // Looking for a trace that satisfies the invariant: a bad state
        // rules out every extension.
        if self.prop.negated && bad {
            return Ok(());
        }
        // Blocked and required constraints are monotone under extension, so
        // a parent that already matched never needs rechecking.
        for w in &self.assume.blocked {
            if w.satisfied_by(sig, &self.path)? {
                return Ok(());
            }
        }
        let mut req = parent_req.to_vec();
        for (i, w) in self.assume.required.iter().enumerate() {
            if !req[i] {
                req[i] = w.satisfied_by(sig, &self.path)?;
            }
        }
        let mut any = parent_any;
        if !any {
            for w in &self.assume.required_any {
                if w.satisfied_by(sig, &self.path)? {
                    any = true;
                    break;
                }
            }
        }
        let depth = self.path.len() - 1;
        let target = bad != self.prop.negated;
        if target
            && req.iter().all(|r| *r)
            && (any || self.assume.required_any.is_empty())
            && self.bound.admits(depth)
        {
            self.best = Some(self.path.clone());
            if self.bound.exact || depth == 0 {
                self.done = true;
            } else {
                self.limit = depth - 1;
            }
            return Ok(());
        }
        if depth >= self.limit {
            return Ok(());
        }
        let last = self.path.last().expect("non-empty path").clone();
        let succ = self.verifier.successors(&last)?;
        for t in succ.iter() {
            self.path.push(t.clone());
            let r = self.node(bad, &req, any);
            self.path.pop();
            r?;
            if self.done || depth >= self.limit {
                break;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{ArithOp, CmpOp, Domain, Expr, Signature};

    pub(crate) fn counter() -> (SymbolicTransitionSystem, Property) {
        let mut sig = Signature::new();
        sig.add_var("a", Domain::Int { lo: -3, hi: 3 }).unwrap();
        let a = || Expr::Var(0);
        let step = |op| Expr::cmp(CmpOp::Eq, Expr::Next(0), Expr::arith(op, a(), Expr::int(1)));
        let trans = Expr::Or(vec![
            step(ArithOp::Add),
            step(ArithOp::Sub),
            Expr::cmp(CmpOp::Eq, Expr::Next(0), a()),
        ]);
        let sts = SymbolicTransitionSystem {
            sig,
            init: Expr::cmp(CmpOp::Eq, a(), Expr::int(1)),
            trans,
        };
        let phi = Property::invariant("phi", Expr::cmp(CmpOp::Eq, a(), Expr::int(1)));
        (sts, phi)
    }

    fn vals(t: &Trace) -> Vec<i64> {
        t.states().iter().map(|s| s.get(0).as_int().unwrap()).collect()
    }

    #[test]
    fn counter_bound_one_enumeration() {
        let (sts, _) = counter();
        let v = Verifier::new(&sts);
        let all = v.enumerate_traces(&ConstraintSet::none(), Bound::upto(1)).unwrap();
        let got: Vec<Vec<i64>> = all.iter().map(vals).collect();
        assert_eq!(got, vec![vec![1], vec![1, 0], vec![1, 1], vec![1, 2]]);
    }

    #[test]
    fn counter_first_counterexample() {
        let (sts, phi) = counter();
        let v = Verifier::new(&sts);
        let cex = v
            .counterexample(&ConstraintSet::none(), &phi, Bound::upto(1))
            .unwrap()
            .unwrap();
        assert_eq!(vals(&cex), vec![1, 0]);
        assert_eq!(v.count_counterexamples(&phi, Bound::upto(1)).unwrap(), 2);
        assert_eq!(v.count_counterexamples(&phi, Bound::upto(0)).unwrap(), 0);
        assert_eq!(v.count_counterexamples(&phi, Bound::exact(2)).unwrap(), 8);
        assert_eq!(v.count_counterexamples(&phi, Bound::upto(2)).unwrap(), 10);
    }

    #[test]
    fn trivial_property_holds() {
        let (sts, _) = counter();
        let v = Verifier::new(&sts);
        let tt = Property::invariant("true", Expr::tt());
        assert!(v.verify(&ConstraintSet::none(), &tt, Bound::upto(3)).unwrap().is_ok());
    }

    #[test]
    fn shortest_witness_wins() {
        let (sts, phi) = counter();
        let v = Verifier::new(&sts);
        // a@last = 3 needs two increments.
        let cex = v
            .counterexample(&ConstraintSet::none(), &phi.negate(), Bound::upto(3))
            .unwrap()
            .unwrap();
        assert_eq!(vals(&cex), vec![1]);
    }
}
