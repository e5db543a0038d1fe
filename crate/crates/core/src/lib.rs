//! Counterexample classification for finite-domain symbolic transition
//! systems.
//!
//! Given a transition system, an invariant and a set of predicates, the
//! [`classify`](classify::classify) loop partitions every bounded
//! counterexample into a small, non-redundant set of trace constraints:
//! existentially quantified conjunctions of predicate instances over trace
//! positions.

pub mod classify;
pub mod cli;
pub mod corpus;
pub mod factgen;
pub mod kernel;
pub mod modelparse;
pub mod tracecon;
pub mod verifier;
