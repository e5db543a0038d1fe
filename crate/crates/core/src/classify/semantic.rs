//! Brute-force classification oracles over explicit finite classes.
//!
//! These work on materialized trace sets (or any ordered items) and decide
//! redundancy directly from set inclusion, independently of the symbolic
//! machinery.

use std::collections::BTreeSet;

/// A member of class `i` that belongs to no other class, if one exists.
pub fn canonical_member<T: Ord>(classes: &[BTreeSet<T>], i: usize) -> Option<&T> {
    classes[i].iter().find(|x| {
        classes
            .iter()
            .enumerate()
            .all(|(j, c)| j == i || !c.contains(*x))
    })
}

/// Indices of classes without a canonical member.
pub fn redundant_classes<T: Ord>(classes: &[BTreeSet<T>]) -> Vec<usize> {
    (0..classes.len())
        .filter(|&i| canonical_member(classes, i).is_none())
        .collect()
}

/// Whether some class is contained in the union of the others.
pub fn is_redundant<T: Ord>(classes: &[BTreeSet<T>]) -> bool {
    (0..classes.len()).any(|i| covered_by_others(classes, i, &|_| true))
}

fn covered_by_others<T: Ord>(
    classes: &[BTreeSet<T>],
    i: usize,
    alive: &dyn Fn(usize) -> bool,
) -> bool {
    classes[i].iter().all(|x| {
        classes
            .iter()
            .enumerate()
            .any(|(j, c)| j != i && alive(j) && c.contains(x))
    })
}

/// Scans the classes in order and drops each one covered by the union of
/// the classes still kept. Returns the indices of the survivors.
pub fn make_nonredundant<T: Ord>(classes: &[BTreeSet<T>]) -> Vec<usize> {
    let mut alive = vec![true; classes.len()];
    for i in 0..classes.len() {
        let snapshot = alive.clone();
        if covered_by_others(classes, i, &|j| snapshot[j]) {
            alive[i] = false;
        }
    }
    (0..classes.len()).filter(|&i| alive[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u32]) -> BTreeSet<u32> {
        xs.iter().copied().collect()
    }

    #[test]
    fn disjoint_singletons_are_not_redundant() {
        let c = vec![set(&[1]), set(&[2])];
        assert!(!is_redundant(&c));
        assert_eq!(make_nonredundant(&c), vec![0, 1]);
    }

    #[test]
    fn duplicates_collapse_to_one() {
        let c = vec![set(&[1, 2]), set(&[1, 2])];
        assert!(is_redundant(&c));
        assert_eq!(make_nonredundant(&c), vec![1]);
    }

    #[test]
    fn singleton_is_its_own_canonical() {
        let c = vec![set(&[4, 5])];
        assert_eq!(canonical_member(&c, 0), Some(&4));
    }
}
