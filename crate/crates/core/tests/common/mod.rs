//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here goes through the verifier's search or the constraint
//! planner: traces are expanded from the full product of variable domains,
//! and constraints are checked by trying every position binding.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cexclass::factgen::{Arg, Atom, BuiltinKind, FactConfig, PredRef, PredicateEntry, PredicateSet};
use cexclass::kernel::{
    eval_state, eval_transition, ParamKind, Property, Signature, State, SymbolicTransitionSystem,
    Trace, Value,
};
use cexclass::modelparse::{parse_model, Model};
use cexclass::tracecon::TraceConstraint;
use rand::Rng;

/// Every state of the signature, by brute-force product of domains.
pub fn all_states(sig: &Signature) -> Vec<State> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for d in &sig.vars {
        let vals = sig.types.values(d.domain);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(State::new).collect()
}

fn truthy(v: Value) -> bool {
    v == Value::Bool(true)
}

/// All traces of length at most `bound` (or exactly `bound`), expanded by
/// plain recursion over the explicit transition relation.
pub fn naive_traces(sts: &SymbolicTransitionSystem, bound: usize, exact: bool) -> Vec<Trace> {
    let states = all_states(&sts.sig);
    let init: Vec<usize> = (0..states.len())
        .filter(|&i| truthy(eval_state(&sts.init, &states[i]).unwrap()))
        .collect();
    let succ: Vec<Vec<usize>> = states
        .iter()
        .map(|s| {
            (0..states.len())
                .filter(|&j| eval_transition(&sts.trans, s, &states[j]).unwrap())
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    fn go(
        path: &mut Vec<usize>,
        bound: usize,
        exact: bool,
        succ: &[Vec<usize>],
        states: &[State],
        out: &mut Vec<Trace>,
    ) {
        let len = path.len() - 1;
        if !exact || len == bound {
            out.push(Trace::new(path.iter().map(|&i| states[i].clone()).collect()).unwrap());
        }
        if len == bound {
            return;
        }
        let last = *path.last().unwrap();
        for &n in &succ[last] {
            path.push(n);
            go(path, bound, exact, succ, states, out);
            path.pop();
        }
    }
    for i in init {
        let mut path = vec![i];
        go(&mut path, bound, exact, &succ, &states, &mut out);
    }
    out
}

/// Direct reading of `G expr` (or its negation) on a trace.
pub fn holds(t: &Trace, prop: &Property) -> bool {
    let all = t
        .states()
        .iter()
        .all(|s| truthy(eval_state(&prop.expr, s).unwrap()));
    all != prop.negated
}

pub fn naive_counterexamples(sts: &SymbolicTransitionSystem, prop: &Property, bound: usize) -> Vec<Trace> {
    naive_traces(sts, bound, false)
        .into_iter()
        .filter(|t| !holds(t, prop))
        .collect()
}

/// Whether some binding of the position variables into the trace makes
/// every conjunct true; tries all `(len+1)^k` bindings.
pub fn brute_satisfies(sig: &Signature, t: &Trace, w: &TraceConstraint) -> bool {
    let n = t.states().len();
    let k = w.k();
    let mut binding = vec![0usize; k];
    loop {
        let ok = w
            .conjuncts()
            .iter()
            .all(|c| c.eval_mapped(sig, t.states(), &|p| binding[p]).unwrap());
        if ok {
            return true;
        }
        let mut i = 0;
        loop {
            if i == k {
                return false;
            }
            binding[i] += 1;
            if binding[i] < n {
                break;
            }
            binding[i] = 0;
            i += 1;
        }
    }
}

/// The traces among `traces` that satisfy `w`, as indices.
pub fn members(sig: &Signature, traces: &[Trace], w: &TraceConstraint) -> BTreeSet<usize> {
    (0..traces.len())
        .filter(|&i| brute_satisfies(sig, &traces[i], w))
        .collect()
}

/// Every true instantiation of the predicate set on `t`, written out from
/// the binding scheme rather than taken from the fact generator.
pub fn oracle_facts(sig: &Signature, t: &Trace, preds: &PredicateSet, cfg: &FactConfig) -> BTreeSet<Atom> {
    let n = t.states().len();
    let mut out = BTreeSet::new();
    let entries = if preds.entries.is_empty() {
        vec![PredicateEntry::Builtin(cexclass::factgen::BuiltinDef {
            name: "true".into(),
            kind: BuiltinKind::Trivial,
            scope: None,
        })]
    } else {
        preds.entries.clone()
    };
    for e in &entries {
        match e {
            PredicateEntry::Builtin(b) => {
                let vars: Vec<usize> = b.scope.clone().unwrap_or_else(|| (0..sig.vars.len()).collect());
                let same = |x: usize, y: usize| sig.var_type(x) == sig.var_type(y);
                let in_window = |p: usize, q: usize| cfg.eq_window.is_none_or(|w| q - p < w);
                match b.kind {
                    BuiltinKind::Equality | BuiltinKind::Disequality => {
                        let eq = b.kind == BuiltinKind::Equality;
                        for &v in &vars {
                            for p in 0..n {
                                for val in sig.types.values(sig.vars[v].domain) {
                                    let seen = t.value(v, p);
                                    if eq && val == seen {
                                        out.insert(Atom::EqConst { var: v, pos: p, value: val });
                                    }
                                    if !eq && val != seen {
                                        out.insert(Atom::NeqConst { var: v, pos: p, value: val });
                                    }
                                }
                            }
                        }
                        for &v in &vars {
                            for &w in &vars {
                                for p in 0..n {
                                    for q in p..n {
                                        if (p, v) >= (q, w) || !same(v, w) || !in_window(p, q) {
                                            continue;
                                        }
                                        let equal = t.value(v, p) == t.value(w, q);
                                        if eq && equal {
                                            out.insert(Atom::EqVars { a: (v, p), b: (w, q) });
                                        }
                                        if !eq && !equal {
                                            out.insert(Atom::NeqVars { a: (v, p), b: (w, q) });
                                        }
                                    }
                                }
                            }
                        }
                    }
                    BuiltinKind::Order => {
                        for p in 1..n {
                            out.insert(Atom::Less(p - 1, p));
                        }
                    }
                    BuiltinKind::Trivial => {
                        out.insert(Atom::True);
                    }
                }
            }
            PredicateEntry::User(def) => {
                if def.params.len() > cfg.max_arity {
                    continue;
                }
                let pools: Vec<Vec<Arg>> = def
                    .params
                    .iter()
                    .map(|p| match p.kind {
                        ParamKind::Pos => (0..n).map(Arg::Pos).collect(),
                        ParamKind::Value(ty) => (0..sig.vars.len())
                            .filter(|&v| sig.var_type(v) == ty)
                            .flat_map(|var| (0..n).map(move |pos| Arg::Var { var, pos }))
                            .collect(),
                        ParamKind::Record(r) => (0..sig.record_vars.len())
                            .filter(|&rec| sig.record_vars[rec].record == r)
                            .flat_map(|rec| (0..n).map(move |pos| Arg::Record { rec, pos }))
                            .collect(),
                    })
                    .collect();
                let mut tuples: Vec<Vec<Arg>> = vec![Vec::new()];
                for pool in &pools {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|tu| {
                            pool.iter().map(move |a| {
                                let mut tu = tu.clone();
                                tu.push(*a);
                                tu
                            })
                        })
                        .collect();
                }
                for args in tuples {
                    let atom = Atom::Pred {
                        def: PredRef(def.clone()),
                        args,
                    };
                    if atom.eval(sig, t.states()).unwrap() {
                        out.insert(atom);
                    }
                }
            }
        }
    }
    out
}

pub const COUNTER_SRC: &str = "\
var a: int[-3..3]
init a = 1
trans a' = a + 1 or a' = a - 1 or a' = a
invariant Phi: a = 1
pred lessThanOne[v: int] { v < 1 }
pred greaterThanOne[v: int] { v > 1 }
";

pub fn counter() -> Model {
    parse_model(COUNTER_SRC).unwrap()
}

/// A random model with two or three variables, each with at most three
/// values, a nondeterministic transition relation and a state invariant
/// that some initial state satisfies.
pub fn random_model_source(rng: &mut impl Rng) -> String {
    let nvars = rng.gen_range(2..=3);
    let mut src = String::from("type E = {A, B, C}\ntype F = {P, Q}\n");
    let mut kinds = Vec::new();
    for i in 0..nvars {
        let kind = rng.gen_range(0..4);
        let decl = match kind {
            0 => "bool",
            1 => "int[0..2]",
            2 => "E",
            _ => "F",
        };
        src.push_str(&format!("var v{i}: {decl}\n"));
        kinds.push(kind);
    }
    let lit = |rng: &mut dyn rand::RngCore, kind: usize| -> String {
        match kind {
            0 => ["true", "false"][rng.gen_range(0..2)].to_string(),
            1 => rng.gen_range(0..=2).to_string(),
            2 => ["A", "B", "C"][rng.gen_range(0..3)].to_string(),
            _ => ["P", "Q"][rng.gen_range(0..2)].to_string(),
        }
    };
    let atom = |rng: &mut dyn rand::RngCore| -> String {
        let v = rng.gen_range(0..nvars);
        let op = if rng.gen_bool(0.7) { "=" } else { "!=" };
        format!("v{v} {op} {}", lit(rng, kinds[v]))
    };
    let mut init = Vec::new();
    for (i, &kind) in kinds.iter().enumerate() {
        if rng.gen_bool(0.7) {
            init.push(format!("v{i} = {}", lit(rng, kind)));
        }
    }
    if init.is_empty() {
        init.push("true".into());
    }
    src.push_str(&format!("init {}\n", init.join(" and ")));
    let ncmds = rng.gen_range(1..=3);
    let mut cmds = Vec::new();
    for _ in 0..ncmds {
        let mut parts = Vec::new();
        if rng.gen_bool(0.5) {
            parts.push(atom(rng));
        }
        for (i, &kind) in kinds.iter().enumerate() {
            let upd = match rng.gen_range(0..4) {
                0 => format!("v{i}' = v{i}"),
                1 if kind == 1 => format!("v{i}' = v{i} + 1"),
                2 if kind == 1 => format!("v{i}' = v{i} - 1"),
                3 if kind == 0 => format!("v{i}' = (not v{i})"),
                _ => format!("v{i}' = {}", lit(rng, kind)),
            };
            parts.push(upd);
        }
        cmds.push(format!("({})", parts.join(" and ")));
    }
    src.push_str(&format!("trans {}\n", cmds.join(" or ")));
    let prop = if rng.gen_bool(0.5) {
        atom(rng)
    } else {
        format!("not ({} and {})", atom(rng), atom(rng))
    };
    src.push_str(&format!("invariant Phi: {prop}\n"));
    src
}

/// A random model whose property has at least one accepting trace.
pub fn random_model(rng: &mut impl Rng) -> (String, Model) {
    loop {
        let src = random_model_source(rng);
        let m = parse_model(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
        let prop = m.default_property();
        let accepting = all_states(&m.system.sig).iter().any(|s| {
            truthy(eval_state(&m.system.init, s).unwrap()) && truthy(eval_state(&prop.expr, s).unwrap())
        });
        if accepting {
            return (src, m);
        }
    }
}
