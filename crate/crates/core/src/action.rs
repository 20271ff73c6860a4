//! Group actions by median automorphisms.
//!
//! An action is a finite list of named generators, each a permutation of the
//! carrier commuting with `med`. The group itself is never materialized
//! unless asked for; orbits and saturations only ever apply generators
//! forward, which suffices because in a finite group every inverse is a
//! positive power.
//!
//! An action is minimal when no nonempty proper subset is both invariant and
//! median closed; equivalently, every singleton grows to the full carrier
//! under alternating saturation and median closure.

use crate::algebra::MedianAlgebra;
use crate::error::{Error, Result};
use crate::set::PointSet;
use std::collections::HashSet;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<u16>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n as u16).collect(),
        }
    }

    pub fn from_map(map: &[usize]) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in map {
            if v >= n {
                return Err(Error::BadPermutation {
                    generator: String::new(),
                    reason: format!("image {v} is out of range for n = {n}"),
                });
            }
            if seen[v] {
                return Err(Error::BadPermutation {
                    generator: String::new(),
                    reason: format!("image {v} appears twice"),
                });
            }
            seen[v] = true;
        }
        Ok(Permutation {
            map: map.iter().map(|&v| v as u16).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x] as usize
    }

    /// Function composition: `(self.compose(other))(x) = self(other(x))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.n(), other.n());
        Permutation {
            map: other.map.iter().map(|&v| self.map[v as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut map = vec![0u16; self.map.len()];
        for (x, &v) in self.map.iter().enumerate() {
            map[v as usize] = x as u16;
        }
        Permutation { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(x, &v)| v as usize == x)
    }

    pub fn as_map(&self) -> Vec<usize> {
        self.map.iter().map(|&v| v as usize).collect()
    }
}

#[derive(Clone, Debug)]
pub struct GroupAction {
    algebra: Arc<MedianAlgebra>,
    generators: Vec<(String, Permutation)>,
}

/// Validates that every generator is a permutation commuting with `med` and
/// wraps the result. The automorphism check is exhaustive on small carriers
/// and sampled on large ones.
pub fn validate_action(
    algebra: Arc<MedianAlgebra>,
    generators: &[(String, Vec<usize>)],
) -> Result<GroupAction> {
    let n = algebra.n();
    let mut validated = Vec::with_capacity(generators.len());
    for (name, map) in generators {
        if map.len() != n {
            return Err(Error::BadPermutation {
                generator: name.clone(),
                reason: format!("permutation has length {}, expected {n}", map.len()),
            });
        }
        let perm = Permutation::from_map(map).map_err(|e| match e {
            Error::BadPermutation { reason, .. } => Error::BadPermutation {
                generator: name.clone(),
                reason,
            },
            other => other,
        })?;
        if let Some((x, y, z)) = algebra.morphism_witness(&algebra, map) {
            return Err(Error::NotAutomorphism {
                generator: name.clone(),
                x,
                y,
                z,
            });
        }
        validated.push((name.clone(), perm));
    }
    Ok(GroupAction {
        algebra,
        generators: validated,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalityReport {
    pub minimal: bool,
    /// Smallest invariant median-closed proper subset found, when not
    /// minimal; ties broken by set order.
    pub witness: Option<PointSet>,
}

impl GroupAction {
    pub fn algebra(&self) -> &Arc<MedianAlgebra> {
        &self.algebra
    }

    pub fn generators(&self) -> &[(String, Permutation)] {
        &self.generators
    }

    pub fn generator(&self, name: &str) -> Option<&Permutation> {
        self.generators
            .iter()
            .find(|(g, _)| g == name)
            .map(|(_, p)| p)
    }

    /// All group elements generated, breadth first from the identity;
    /// errors when the group grows past `cap`. Sorted for determinism.
    pub fn group_elements(&self, cap: usize) -> Result<Vec<Permutation>> {
        let n = self.algebra.n();
        let mut seen: HashSet<Permutation> = HashSet::new();
        let mut queue = vec![Permutation::identity(n)];
        seen.insert(queue[0].clone());
        let mut head = 0;
        while head < queue.len() {
            let current = queue[head].clone();
            head += 1;
            for (_, g) in &self.generators {
                let next = g.compose(&current);
                if seen.insert(next.clone()) {
                    if seen.len() > cap {
                        return Err(Error::TooLarge {
                            what: "group closure",
                            limit: cap,
                            actual: seen.len(),
                        });
                    }
                    queue.push(next);
                }
            }
        }
        queue.sort();
        Ok(queue)
    }

    pub fn orbit(&self, x: usize) -> PointSet {
        self.saturate(&PointSet::singleton(self.algebra.n(), x))
    }

    /// Closure of a set under all generators.
    pub fn saturate(&self, s: &PointSet) -> PointSet {
        let mut closed = s.clone();
        let mut frontier: Vec<usize> = s.iter().collect();
        while let Some(x) = frontier.pop() {
            for (_, g) in &self.generators {
                let y = g.apply(x);
                if !closed.contains(y) {
                    closed.insert(y);
                    frontier.push(y);
                }
            }
        }
        closed
    }

    /// Smallest invariant median-closed set containing `s`.
    pub fn invariant_closure(&self, s: &PointSet) -> PointSet {
        let mut current = s.clone();
        loop {
            let next = self.algebra.med_closure(&self.saturate(&current));
            if next == current {
                return current;
            }
            current = next;
        }
    }

    /// Tests minimality by growing every singleton to its invariant
    /// median-closed closure; any closure short of the full carrier is a
    /// witness against minimality.
    pub fn is_minimal(&self) -> MinimalityReport {
        let n = self.algebra.n();
        let mut witness: Option<PointSet> = None;
        for seed in 0..n {
            let closure = self.invariant_closure(&PointSet::singleton(n, seed));
            if closure.count() == n {
                continue;
            }
            let better = match &witness {
                None => true,
                Some(w) => (closure.count(), &closure) < (w.count(), w),
            };
            if better {
                witness = Some(closure);
            }
        }
        MinimalityReport {
            minimal: witness.is_none(),
            witness,
        }
    }

    /// Resolves a word in the generators to a permutation. Tokens are
    /// separated by whitespace or `*`; a trailing `'` or `^-1` inverts a
    /// generator; the empty word, `e`, and `1` denote the identity. Letters
    /// compose as functions, so `g h` applies `h` first.
    pub fn parse_word(&self, word: &str) -> Result<Permutation> {
        let n = self.algebra.n();
        let mut result = Permutation::identity(n);
        for token in word.split(|c: char| c.is_whitespace() || c == '*') {
            if token.is_empty() || token == "e" || token == "1" {
                continue;
            }
            let (name, invert) = if let Some(base) = token.strip_suffix("^-1") {
                (base, true)
            } else if let Some(base) = token.strip_suffix('\'') {
                (base, true)
            } else {
                (token, false)
            };
            let perm = self.generator(name).ok_or_else(|| Error::FileFormat {
                reason: format!("word {word:?} references unknown generator {name:?}"),
            })?;
            let factor = if invert { perm.inverse() } else { perm.clone() };
            result = result.compose(&factor);
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Arc<MedianAlgebra> {
        Arc::new(MedianAlgebra::path(3).unwrap())
    }

    fn p3_flip() -> GroupAction {
        validate_action(p3(), &[("s".into(), vec![2, 1, 0])]).unwrap()
    }

    /// Square rotation 00 -> 01 -> 11 -> 10 -> 00 in row order 0,1,3,2.
    fn square_rotation() -> GroupAction {
        let m = Arc::new(MedianAlgebra::hypercube(2).unwrap());
        validate_action(m, &[("r".into(), vec![1, 3, 0, 2])]).unwrap()
    }

    #[test]
    fn transposition_on_p3_is_not_an_automorphism() {
        let err = validate_action(p3(), &[("t".into(), vec![1, 0, 2])]).unwrap_err();
        match err {
            Error::NotAutomorphism { generator, .. } => assert_eq!(generator, "t"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_bijective_map_is_rejected() {
        let err = validate_action(p3(), &[("t".into(), vec![0, 0, 2])]).unwrap_err();
        assert!(matches!(err, Error::BadPermutation { .. }));
    }

    #[test]
    fn flip_action_has_two_elements() {
        let g = p3_flip().group_elements(16).unwrap();
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn rotation_action_has_four_elements() {
        let g = square_rotation().group_elements(16).unwrap();
        assert_eq!(g.len(), 4);
    }

    #[test]
    fn group_closure_cap_is_enforced() {
        let err = square_rotation().group_elements(2).unwrap_err();
        assert!(matches!(err, Error::TooLarge { .. }));
    }

    #[test]
    fn orbits_of_the_flip() {
        let a = p3_flip();
        assert_eq!(a.orbit(0), PointSet::from_indices(3, [0, 2]));
        assert_eq!(a.orbit(1), PointSet::singleton(3, 1));
    }

    #[test]
    fn flip_action_is_not_minimal_with_midpoint_witness() {
        let report = p3_flip().is_minimal();
        assert!(!report.minimal);
        assert_eq!(report.witness, Some(PointSet::singleton(3, 1)));
    }

    #[test]
    fn trivial_action_witness_is_the_first_fixed_point() {
        let a = validate_action(p3(), &[]).unwrap();
        let report = a.is_minimal();
        assert!(!report.minimal);
        assert_eq!(report.witness, Some(PointSet::singleton(3, 0)));
    }

    #[test]
    fn rotation_action_is_minimal() {
        let report = square_rotation().is_minimal();
        assert!(report.minimal);
        assert_eq!(report.witness, None);
    }

    #[test]
    fn sign_flips_on_the_cube_act_minimally() {
        // Two sign flips generate a four-element group whose orbits are the
        // parity classes; closure under med bridges the parities.
        let m = Arc::new(MedianAlgebra::hypercube(3).unwrap());
        let g1: Vec<usize> = (0..8).map(|x| x ^ 6).collect();
        let g2: Vec<usize> = (0..8).map(|x| x ^ 5).collect();
        let a = validate_action(m, &[("g1".into(), g1), ("g2".into(), g2)]).unwrap();
        assert_eq!(a.orbit(0), PointSet::from_indices(8, [0, 3, 5, 6]));
        let report = a.is_minimal();
        assert!(report.minimal);
    }

    #[test]
    fn words_resolve_and_compose_right_to_left() {
        let a = square_rotation();
        let r = a.generator("r").unwrap().clone();
        assert_eq!(a.parse_word("r r r").unwrap(), r.inverse());
        assert_eq!(a.parse_word("r'").unwrap(), r.inverse());
        assert_eq!(a.parse_word("r^-1").unwrap(), r.inverse());
        assert_eq!(a.parse_word("r * r'").unwrap(), Permutation::identity(4));
        assert!(a.parse_word("").unwrap().is_identity());
        assert!(a.parse_word("e").unwrap().is_identity());
        let err = a.parse_word("q").unwrap_err();
        assert!(matches!(err, Error::FileFormat { .. }));
    }

    #[test]
    fn inverse_and_compose_are_consistent() {
        let a = square_rotation();
        let r = a.generator("r").unwrap();
        assert!(r.compose(&r.inverse()).is_identity());
        for x in 0..4 {
            assert_eq!(r.compose(r).apply(x), r.apply(r.apply(x)));
        }
    }
}
