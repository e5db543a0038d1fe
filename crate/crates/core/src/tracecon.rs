//! Trace constraints: existentially quantified conjunctions of atomic facts
//! over position variables, their satisfaction relation, construction from
//! fact sets, and deletion-based minimization.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::factgen::{Atom, Category, FactSet};
use crate::kernel::{EvalError, Property, Signature, State, Trace};
use crate::verifier::{Bound, ConstraintSet, Verifier};

/// Above this many position variables, canonical equality falls back to a
/// first-occurrence renaming instead of trying every permutation.
const PERMUTATION_LIMIT: usize = 6;

/// `exists i1..ik : c1 /\ ... /\ cn`. Conjunct positions are indices of
/// position variables in `0..k`.
#[derive(Clone)]
pub struct TraceConstraint {
    k: usize,
    conjuncts: Vec<Atom>,
    plan: Plan,
}

/// Search order for satisfaction: which variable to bind next and which
/// conjuncts become decidable after each binding.
#[derive(Clone, Debug, Default)]
struct Plan {
    order: Vec<usize>,
    ground: Vec<usize>,
    checks: Vec<Vec<usize>>,
}

impl Plan {
    fn new(k: usize, conjuncts: &[Atom]) -> Plan {
        let vars: Vec<Vec<usize>> = conjuncts
            .iter()
            .map(|c| {
                let mut v = c.positions();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let ground = (0..conjuncts.len()).filter(|&i| vars[i].is_empty()).collect();
        let mut bound = vec![false; k];
        let mut done: Vec<bool> = vars.iter().map(|v| v.is_empty()).collect();
        let mut order = Vec::with_capacity(k);
        let mut checks = Vec::with_capacity(k);
        for _ in 0..k {
            // Bind the variable that completes the most conjuncts; ties go to
            // the lowest index.
            let mut best = None;
            let mut best_score = 0usize;
            for v in (0..k).filter(|&v| !bound[v]) {
                let score = (0..conjuncts.len())
                    .filter(|&i| !done[i] && vars[i].iter().all(|&x| x == v || bound[x]))
                    .count();
                if best.is_none() || score > best_score {
                    best = Some(v);
                    best_score = score;
                }
            }
            let v = best.expect("unbound variable remains");
            bound[v] = true;
            let now: Vec<usize> = (0..conjuncts.len())
                .filter(|&i| !done[i] && vars[i].iter().all(|&x| bound[x]))
                .collect();
            for &i in &now {
                done[i] = true;
            }
            order.push(v);
            checks.push(now);
        }
        Plan {
            order,
            ground,
            checks,
        }
    }
}

impl PartialEq for TraceConstraint {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.conjuncts == other.conjuncts
    }
}

impl Eq for TraceConstraint {}

impl std::hash::Hash for TraceConstraint {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.k.hash(state);
        self.conjuncts.hash(state);
    }
}

impl fmt::Debug for TraceConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TraceConstraint")
            .field("k", &self.k)
            .field("conjuncts", &self.conjuncts)
            .finish()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintError {
    #[error("conjunct mentions position variable {var} but only {k} are quantified")]
    UnboundVariable { var: usize, k: usize },
}

/// Raised when a constraint does not guarantee a violation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MinimizeError {
    #[error("the facts do not sufficiently characterize the violation")]
    NotSufficient,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl TraceConstraint {
    /// Builds a constraint over `k` position variables.
    pub fn new(k: usize, conjuncts: Vec<Atom>) -> Result<Self, ConstraintError> {
        let mut uniq: Vec<Atom> = Vec::with_capacity(conjuncts.len());
        for c in conjuncts {
            if let Some(var) = c.positions().into_iter().find(|&p| p >= k) {
                return Err(ConstraintError::UnboundVariable { var, k });
            }
            let c = c.oriented();
            if !uniq.contains(&c) {
                uniq.push(c);
            }
        }
        let plan = Plan::new(k, &uniq);
        Ok(TraceConstraint {
            k,
            conjuncts: uniq,
            plan,
        })
    }

    /// The empty constraint, satisfied by every trace.
    pub fn empty() -> Self {
        TraceConstraint::new(0, Vec::new()).expect("empty constraint is well formed")
    }

    /// Number of quantified position variables.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn conjuncts(&self) -> &[Atom] {
        &self.conjuncts
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    /// Generalizes a fact set into a constraint: every distinct trace index
    /// becomes a position variable, numbered in ascending index order.
    pub fn from_facts(gamma: &FactSet) -> Self {
        let index: BTreeMap<usize, usize> = gamma
            .positions_used
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i))
            .collect();
        let conjuncts = gamma
            .facts
            .iter()
            .map(|f| f.map_positions(|p| index[&p]))
            .collect();
        TraceConstraint::new(index.len(), conjuncts).expect("all positions are indexed")
    }

    /// Keeps only the conjuncts selected by `keep` and drops position
    /// variables that no remaining conjunct mentions, preserving the order
    /// of the survivors.
    pub fn restrict(&self, keep: &[bool]) -> Self {
        let kept: Vec<Atom> = self
            .conjuncts
            .iter()
            .zip(keep)
            .filter(|(_, k)| **k)
            .map(|(c, _)| c.clone())
            .collect();
        let mut used = vec![false; self.k];
        for c in &kept {
            for p in c.positions() {
                used[p] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.k];
        let mut next = 0;
        for (v, u) in used.iter().enumerate() {
            if *u {
                remap[v] = next;
                next += 1;
            }
        }
        let conjuncts = kept.iter().map(|c| c.map_positions(|p| remap[p])).collect();
        TraceConstraint::new(next, conjuncts).expect("remapped constraint is well formed")
    }

    /// Whether some binding of the position variables into the positions of
    /// `states` makes every conjunct true.
    pub fn satisfied_by(&self, sig: &Signature, states: &[State]) -> Result<bool, EvalError> {
        if states.is_empty() {
            return Ok(false);
        }
        for &i in &self.plan.ground {
            if !self.conjuncts[i].eval(sig, states)? {
                return Ok(false);
            }
        }
        let mut binding = vec![0usize; self.k];
        self.bind(sig, states, 0, &mut binding)
    }

    fn bind(
        &self,
        sig: &Signature,
        states: &[State],
        depth: usize,
        binding: &mut Vec<usize>,
    ) -> Result<bool, EvalError> {
        if depth == self.k {
            return Ok(true);
        }
        let var = self.plan.order[depth];
        'positions: for p in 0..states.len() {
            binding[var] = p;
            for &i in &self.plan.checks[depth] {
                let b = &*binding;
                if !self.conjuncts[i].eval_mapped(sig, states, &|v| b[v])? {
                    continue 'positions;
                }
            }
            if self.bind(sig, states, depth + 1, binding)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Canonical form: conjuncts sorted under the position-variable
    /// renaming that makes the sorted list smallest.
    pub fn canonical(&self) -> Vec<Atom> {
        let sorted = |map: &[usize]| {
            let mut v: Vec<(u8, Atom)> = self
                .conjuncts
                .iter()
                .map(|c| {
                    let c = c.map_positions(|p| map[p]).oriented();
                    (c.display_rank(), c)
                })
                .collect();
            v.sort();
            v.dedup();
            v
        };
        if self.k <= PERMUTATION_LIMIT {
            let mut perm: Vec<usize> = (0..self.k).collect();
            let mut best = sorted(&perm);
            while next_permutation(&mut perm) {
                let cand = sorted(&perm);
                if cand < best {
                    best = cand;
                }
            }
            return best.into_iter().map(|(_, c)| c).collect();
        }
        // Rename by first occurrence in the sorted list.
        let identity: Vec<usize> = (0..self.k).collect();
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        for (_, c) in sorted(&identity) {
            for p in c.positions() {
                if map[p] == usize::MAX {
                    map[p] = next;
                    next += 1;
                }
            }
        }
        for m in map.iter_mut().filter(|m| **m == usize::MAX) {
            *m = next;
            next += 1;
        }
        sorted(&map).into_iter().map(|(_, c)| c).collect()
    }

    /// Structural equality up to renaming of position variables.
    pub fn equivalent(&self, other: &TraceConstraint) -> bool {
        self.k == other.k && self.canonical() == other.canonical()
    }

    /// Renders as `exists i1,i2 : p[x@i2] /\ i1 < i2`.
    pub fn render(&self, sig: &Signature) -> String {
        let mut parts: Vec<&Atom> = self.conjuncts.iter().collect();
        parts.sort_by_key(|c| c.display_rank());
        let name = |p: usize| format!("i{}", p + 1);
        let body = if parts.is_empty() {
            "true".to_string()
        } else {
            parts
                .iter()
                .map(|c| c.render(sig, &name))
                .collect::<Vec<_>>()
                .join(" /\\ ")
        };
        if self.k == 0 {
            body
        } else {
            let vars: Vec<String> = (0..self.k).map(name).collect();
            format!("exists {} : {}", vars.join(","), body)
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// `traceConstraint`: the generalization of `gamma`.
pub fn trace_constraint(gamma: &FactSet) -> TraceConstraint {
    TraceConstraint::from_facts(gamma)
}

/// Whether `trace` satisfies `w`.
pub fn satisfies(sig: &Signature, trace: &Trace, w: &TraceConstraint) -> Result<bool, EvalError> {
    w.satisfied_by(sig, trace.states())
}

/// Whether every bounded trace satisfying `w` violates `prop`.
pub fn implies_violation(
    verifier: &Verifier<'_>,
    w: &TraceConstraint,
    prop: &Property,
    bound: Bound,
) -> Result<bool, EvalError> {
    let assume = ConstraintSet::requiring(w.clone());
    Ok(verifier.verify(&assume, &prop.negate(), bound)?.is_ok())
}

/// Deletion-based minimization. Conjuncts are tried in category order
/// (position facts, user predicates, variable pairs, constants, seed facts)
/// and, within a category, in their original order; each is dropped when
/// the rest still implies a violation. The result is subset-minimal.
pub fn minimize_tc(
    verifier: &Verifier<'_>,
    w: &TraceConstraint,
    prop: &Property,
    bound: Bound,
    seed: Option<&str>,
) -> Result<TraceConstraint, MinimizeError> {
    if !implies_violation(verifier, w, prop, bound)? {
        return Err(MinimizeError::NotSufficient);
    }
    let mut order: Vec<usize> = (0..w.conjuncts.len()).collect();
    let cats: Vec<Category> = w.conjuncts.iter().map(|c| c.category(seed)).collect();
    order.sort_by_key(|&i| cats[i]);
    let mut keep = vec![true; w.conjuncts.len()];
    for i in order {
        keep[i] = false;
        let candidate = w.restrict(&keep);
        if !implies_violation(verifier, &candidate, prop, bound)? {
            keep[i] = true;
        }
    }
    Ok(w.restrict(&keep))
}
