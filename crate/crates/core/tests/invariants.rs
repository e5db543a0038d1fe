//! Property tests over random small models.

mod common;

use cexclass::classify::{classify, ClassifyConfig};
use cexclass::factgen::{facts, FactConfig};
use cexclass::kernel::{State, Trace};
use cexclass::modelparse::Model;
use cexclass::tracecon::{implies_violation, minimize_tc, satisfies, trace_constraint, TraceConstraint};
use cexclass::verifier::{Bound, ConstraintSet, Verifier};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(seed: u64) -> Model {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed)).1
}

fn pick<T: Clone>(xs: &[T], i: usize) -> T {
    xs[i % xs.len()].clone()
}

/// The generalized facts of some trace of the model.
fn some_constraint(m: &Model, traces: &[Trace], i: usize, preds: &[&str]) -> TraceConstraint {
    let t = pick(traces, i);
    let preds = m.predicate_set(preds).unwrap();
    trace_constraint(&facts(&m.system.sig, &t, &preds, &FactConfig::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn a_trace_satisfies_its_own_generalization(seed in any::<u64>(), i in any::<usize>()) {
        let m = model(seed);
        let traces = naive_traces(&m.system, 3, false);
        let t = pick(&traces, i);
        let w = some_constraint(&m, &traces, i, &["eq", "neq", "lt"]);
        prop_assert!(satisfies(&m.system.sig, &t, &w).unwrap());
    }

    #[test]
    fn extensions_keep_satisfaction(seed in any::<u64>(), i in any::<usize>(), j in any::<usize>(), k in any::<usize>()) {
        let m = model(seed);
        let sig = &m.system.sig;
        let traces = naive_traces(&m.system, 2, false);
        let w = some_constraint(&m, &traces, j, &["eq", "lt"]);
        let t = pick(&traces, i);
        // Any states at all, not only successors.
        let extra = pick(&all_states(sig), k);
        let longer = t.extended(&[extra]);
        if satisfies(sig, &t, &w).unwrap() {
            prop_assert!(satisfies(sig, &longer, &w).unwrap());
        }
    }

    #[test]
    fn dropping_conjuncts_only_weakens(seed in any::<u64>(), i in any::<usize>(), j in any::<usize>(), mask in any::<u64>()) {
        let m = model(seed);
        let sig = &m.system.sig;
        let traces = naive_traces(&m.system, 3, false);
        let w = some_constraint(&m, &traces, j, &["eq", "lt"]);
        let keep: Vec<bool> = (0..w.conjuncts().len()).map(|b| mask >> (b % 64) & 1 == 1).collect();
        let weaker = w.restrict(&keep);
        prop_assert!(weaker.k() <= w.k());
        let t = pick(&traces, i);
        if satisfies(sig, &t, &w).unwrap() {
            prop_assert!(satisfies(sig, &t, &weaker).unwrap());
        }
        prop_assert_eq!(satisfies(sig, &t, &weaker).unwrap(), brute_satisfies(sig, &t, &weaker));
    }

    #[test]
    fn minimization_is_subset_minimal(seed in any::<u64>(), i in any::<usize>()) {
        let m = model(seed);
        let prop = m.default_property();
        let cex = naive_counterexamples(&m.system, &prop, 3);
        prop_assume!(!cex.is_empty());
        let v = Verifier::new(&m.system);
        let b = Bound::upto(3);
        let w = some_constraint(&m, &cex, i, &["eq", "lt"]);
        match minimize_tc(&v, &w, &prop, b, None) {
            Ok(min) => {
                prop_assert!(implies_violation(&v, &min, &prop, b).unwrap());
                prop_assert!(min.conjuncts().len() <= w.conjuncts().len());
                // A sub-conjunction: whatever satisfies the input satisfies the result.
                for t in naive_traces(&m.system, 3, false) {
                    if brute_satisfies(&m.system.sig, &t, &w) {
                        prop_assert!(brute_satisfies(&m.system.sig, &t, &min));
                    }
                }
                for d in 0..min.conjuncts().len() {
                    let mut keep = vec![true; min.conjuncts().len()];
                    keep[d] = false;
                    prop_assert!(!implies_violation(&v, &min.restrict(&keep), &prop, b).unwrap());
                }
            }
            Err(_) => prop_assert!(!implies_violation(&v, &w, &prop, b).unwrap()),
        }
    }

    #[test]
    fn classification_is_deterministic(seed in any::<u64>(), bound in 1usize..=3) {
        let m = model(seed);
        let preds = m.predicate_set(&["eq", "lt"]).unwrap();
        let mut cfg = ClassifyConfig::new(Bound::upto(bound));
        cfg.facts = FactConfig { max_arity: 3, eq_window: None };
        let run = || {
            let v = Verifier::new(&m.system);
            classify(&v, &m.default_property(), &preds, &cfg).map(|c| (c.constraints(), c.iterations))
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn verify_agrees_with_count(seed in any::<u64>(), bound in 0usize..=3) {
        let m = model(seed);
        let v = Verifier::new(&m.system);
        let prop = m.default_property();
        let n = v.count_counterexamples(&prop, Bound::upto(bound)).unwrap();
        let ok = v.verify(&ConstraintSet::none(), &prop, Bound::upto(bound)).unwrap().is_ok();
        prop_assert_eq!(ok, n == 0);
        for s in v.enumerate_traces(&ConstraintSet::none(), Bound::upto(bound)).unwrap().iter().flat_map(|t| t.states()) {
            prop_assert!(m.system.sig.check_state(State::values(s)).is_ok());
        }
    }
}
