//! The classification loop: find an unclassified counterexample, turn the
//! facts that hold on it into a trace constraint, minimize it, block it,
//! and repeat; then drop redundant classes.

pub mod semantic;

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::factgen::{facts, Arg, Atom, FactConfig, PredRef, PredicateSet};
use crate::kernel::{EvalError, ParamKind, Property, Signature, Trace};
use crate::tracecon::{implies_violation, minimize_tc, MinimizeError, TraceConstraint};
use crate::verifier::{Bound, ConstraintSet, Verifier};

/// Settings for one classification run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifyConfig {
    pub bound: Bound,
    pub facts: FactConfig,
    /// A user predicate to explore first: while uncovered counterexamples
    /// satisfying it exist, they are classified before any other, and its
    /// facts are the last to be minimized away.
    pub seed: Option<String>,
    /// Report classes found while seeding even when they are redundant.
    /// They still count when deciding whether other classes are redundant.
    pub keep_seeded: bool,
    /// Whether to search a canonical witness for every final class.
    pub witnesses: bool,
}

impl ClassifyConfig {
    pub fn new(bound: Bound) -> Self {
        ClassifyConfig {
            bound,
            facts: FactConfig::default(),
            seed: None,
            keep_seeded: false,
            witnesses: true,
        }
    }
}

/// One class of the result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class {
    pub constraint: TraceConstraint,
    /// The counterexample the class was generalized from.
    pub representative: Trace,
    /// A bounded counterexample in this class and no other, when searched
    /// and found.
    pub canonical_witness: Option<Trace>,
}

#[derive(Clone, Debug)]
pub struct Classification {
    /// Final, non-redundant classes in discovery order.
    pub classes: Vec<Class>,
    /// Classes found by the loop but dropped as redundant.
    pub redundant: Vec<Class>,
    /// Every constraint the loop produced, in discovery order.
    pub discovered: Vec<TraceConstraint>,
    pub bound: Bound,
    pub predicates: Vec<String>,
    /// Loop iterations (counterexamples generalized).
    pub iterations: usize,
    /// Whether fact generation hit a configured limit on any iteration.
    pub capped: bool,
    pub verifier_time: Duration,
    pub total_time: Duration,
}

impl Classification {
    pub fn constraints(&self) -> Vec<TraceConstraint> {
        self.classes.iter().map(|c| c.constraint.clone()).collect()
    }
}

/// Why the predicates could not characterize a counterexample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Insufficiency {
    /// No fact of the predicate set holds on the trace.
    NoFacts,
    /// The facts hold on some trace that does not violate the property.
    NotSufficient,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("V cannot sufficiently characterize the violation{}", capped_note(*.capped))]
    InsufficientPredicates {
        cause: Insufficiency,
        trace: Trace,
        capped: bool,
    },
    #[error("no trace of the system satisfies the property within the bound")]
    NoAcceptingTrace,
    #[error("seed `{0}` is not a user-defined predicate of the predicate set")]
    UnknownSeed(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn capped_note(capped: bool) -> &'static str {
    if capped {
        " (fact generation was capped, so no solution is not proven)"
    } else {
        ""
    }
}

/// `block(W)`: admits exactly the traces satisfying no member of `ws`.
pub fn block(ws: &[TraceConstraint]) -> ConstraintSet {
    ConstraintSet::blocking(ws.to_vec())
}

/// One constraint per typecheckable shape of `pred`, each argument on its
/// own position variable.
pub fn seed_constraints(sig: &Signature, pred: &PredRef) -> Vec<TraceConstraint> {
    let params = &pred.0.params;
    let mut shapes: Vec<Vec<Arg>> = vec![Vec::new()];
    for (i, p) in params.iter().enumerate() {
        let options: Vec<Arg> = match p.kind {
            ParamKind::Pos => vec![Arg::Pos(i)],
            ParamKind::Value(t) => (0..sig.vars.len())
                .filter(|&v| sig.var_type(v) == t)
                .map(|var| Arg::Var { var, pos: i })
                .collect(),
            ParamKind::Record(r) => (0..sig.record_vars.len())
                .filter(|&rec| sig.record_vars[rec].record == r)
                .map(|rec| Arg::Record { rec, pos: i })
                .collect(),
        };
        shapes = shapes
            .into_iter()
            .flat_map(|s| {
                options.iter().map(move |a| {
                    let mut s = s.clone();
                    s.push(*a);
                    s
                })
            })
            .collect();
    }
    shapes
        .into_iter()
        .map(|args| {
            TraceConstraint::new(
                params.len(),
                vec![Atom::Pred {
                    def: pred.clone(),
                    args,
                }],
            )
            .expect("one variable per parameter")
        })
        .collect()
}

/// Drops redundant constraints, scanning in order: a constraint goes when
/// the constraints still kept cover every counterexample without it.
/// Returns the indices kept.
pub fn remove_redundant(
    verifier: &Verifier<'_>,
    ws: &[TraceConstraint],
    prop: &Property,
    bound: Bound,
) -> Result<Vec<usize>, EvalError> {
    remove_redundant_except(verifier, ws, &vec![false; ws.len()], prop, bound)
}

/// [`remove_redundant`], never dropping the constraints flagged in `exempt`.
pub fn remove_redundant_except(
    verifier: &Verifier<'_>,
    ws: &[TraceConstraint],
    exempt: &[bool],
    prop: &Property,
    bound: Bound,
) -> Result<Vec<usize>, EvalError> {
    let mut alive = vec![true; ws.len()];
    for i in 0..ws.len() {
        if exempt[i] {
            continue;
        }
        let others: Vec<TraceConstraint> = ws
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i && alive[*j])
            .map(|(_, w)| w.clone())
            .collect();
        if verifier.verify(&block(&others), prop, bound)?.is_ok() {
            alive[i] = false;
        }
    }
    Ok((0..ws.len()).filter(|&i| alive[i]).collect())
}

/// A bounded counterexample satisfying `ws[i]` and no other member of `ws`.
pub fn canonical_counterexample(
    verifier: &Verifier<'_>,
    ws: &[TraceConstraint],
    i: usize,
    prop: &Property,
    bound: Bound,
) -> Result<Option<Trace>, EvalError> {
    let assume = ConstraintSet {
        required: vec![ws[i].clone()],
        required_any: Vec::new(),
        blocked: ws
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, w)| w.clone())
            .collect(),
    };
    verifier.counterexample(&assume, prop, bound)
}

/// Classifies every counterexample of `sts` within the bound.
pub fn classify(
    verifier: &Verifier<'_>,
    prop: &Property,
    preds: &PredicateSet,
    cfg: &ClassifyConfig,
) -> Result<Classification, ClassifyError> {
    let start = Instant::now();
    let before = verifier.time_spent();
    let sig = &verifier.system().sig;
    let bound = cfg.bound;

    if verifier
        .verify(&ConstraintSet::none(), &prop.negate(), bound)?
        .is_ok()
    {
        return Err(ClassifyError::NoAcceptingTrace);
    }

    let seeds = match &cfg.seed {
        None => Vec::new(),
        Some(name) => {
            let def = preds
                .user(name)
                .ok_or_else(|| ClassifyError::UnknownSeed(name.clone()))?;
            seed_constraints(sig, &PredRef(def.clone()))
        }
    };

    let mut found: Vec<(TraceConstraint, Trace)> = Vec::new();
    let mut seeded: Vec<bool> = Vec::new();
    let mut capped = false;
    let mut seeding = !seeds.is_empty();
    loop {
        let blocked: Vec<TraceConstraint> = found.iter().map(|(w, _)| w.clone()).collect();
        let mut assume = block(&blocked);
        if seeding {
            assume.required_any = seeds.clone();
        }
        let Some(rho) = verifier.counterexample(&assume, prop, bound)? else {
            if seeding {
                seeding = false;
                continue;
            }
            break;
        };
        let gamma = facts(sig, &rho, preds, &cfg.facts)?;
        capped |= gamma.capped;
        if gamma.is_empty() {
            return Err(ClassifyError::InsufficientPredicates {
                cause: Insufficiency::NoFacts,
                trace: rho,
                capped,
            });
        }
        let w = TraceConstraint::from_facts(&gamma);
        let w = match minimize_tc(verifier, &w, prop, bound, cfg.seed.as_deref()) {
            Ok(w) => w,
            Err(MinimizeError::NotSufficient) => {
                return Err(ClassifyError::InsufficientPredicates {
                    cause: Insufficiency::NotSufficient,
                    trace: rho,
                    capped,
                })
            }
            Err(MinimizeError::Eval(e)) => return Err(e.into()),
        };
        if !w.satisfied_by(sig, rho.states())? {
            return Err(ClassifyError::Internal(format!(
                "minimized constraint `{}` does not hold on its own counterexample",
                w.render(sig)
            )));
        }
        found.push((w, rho));
        seeded.push(seeding);
        if found.len() > 100_000 {
            return Err(ClassifyError::Internal("classification loop did not converge".into()));
        }
    }
    let iterations = found.len();

    let ws: Vec<TraceConstraint> = found.iter().map(|(w, _)| w.clone()).collect();
    let exempt: Vec<bool> = seeded.iter().map(|&s| s && cfg.keep_seeded).collect();
    let kept = remove_redundant_except(verifier, &ws, &exempt, prop, bound)?;
    let final_ws: Vec<TraceConstraint> = kept.iter().map(|&i| ws[i].clone()).collect();
    let mut classes = Vec::with_capacity(kept.len());
    let mut redundant = Vec::new();
    for (i, (w, rho)) in found.into_iter().enumerate() {
        let class = Class {
            constraint: w,
            representative: rho,
            canonical_witness: None,
        };
        if kept.contains(&i) {
            classes.push(class);
        } else {
            redundant.push(class);
        }
    }
    if cfg.witnesses {
        for (i, class) in classes.iter_mut().enumerate() {
            class.canonical_witness = canonical_counterexample(verifier, &final_ws, i, prop, bound)?;
        }
    }
    for w in &final_ws {
        if !implies_violation(verifier, w, prop, bound)? {
            return Err(ClassifyError::Internal(format!(
                "class `{}` admits a trace satisfying the property",
                w.render(sig)
            )));
        }
    }

    Ok(Classification {
        classes,
        redundant,
        discovered: ws,
        bound,
        predicates: preds.names().into_iter().map(String::from).collect(),
        iterations,
        capped,
        verifier_time: verifier.time_spent() - before,
        total_time: start.elapsed(),
    })
}
