//! Subsets of a fixed point universe `0..n`, stored as bit sets.
//!
//! Every set carries its universe size; operations on sets from different
//! universes are a logic error and panic in debug builds. The `Ord` instance
//! compares member lists lexicographically, which gives every module a single
//! canonical ordering for deterministic output.

use fixedbitset::FixedBitSet;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    bits: FixedBitSet,
}

impl PointSet {
    pub fn empty(universe: usize) -> Self {
        PointSet {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        PointSet { bits }
    }

    pub fn singleton(universe: usize, x: usize) -> Self {
        let mut s = Self::empty(universe);
        s.insert(x);
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, ix: I) -> Self {
        let mut s = Self::empty(universe);
        for i in ix {
            s.insert(i);
        }
        s
    }

    /// Parses a bit string such as `"0110"`; character `i` is point `i`.
    pub fn from_bit_string(s: &str) -> Option<Self> {
        let mut set = Self::empty(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => set.insert(i),
                '0' => {}
                _ => return None,
            }
        }
        Some(set)
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.bits.contains(x)
    }

    pub fn insert(&mut self, x: usize) {
        self.bits.insert(x);
    }

    pub fn remove(&mut self, x: usize) {
        self.bits.remove(x);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn min(&self) -> Option<usize> {
        self.bits.ones().next()
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe(), other.universe());
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        out
    }

    pub fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.universe(), other.universe());
        self.bits.union_with(&other.bits);
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe(), other.universe());
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe(), other.universe());
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        out
    }

    pub fn complement(&self) -> Self {
        let mut out = Self::full(self.universe());
        out.bits.difference_with(&self.bits);
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert_eq!(self.universe(), other.universe());
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        debug_assert_eq!(self.universe(), other.universe());
        self.bits.is_disjoint(&other.bits)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !self.is_disjoint(other)
    }

    /// Bit mask for universes of at most 32 points; used by subset scans.
    pub fn as_mask(&self) -> u32 {
        debug_assert!(self.universe() <= 32);
        let mut m = 0u32;
        for i in self.iter() {
            m |= 1 << i;
        }
        m
    }

    pub fn from_mask(universe: usize, mask: u32) -> Self {
        debug_assert!(universe <= 32);
        Self::from_indices(universe, (0..universe).filter(|i| mask >> i & 1 == 1))
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.universe())
            .map(|i| if self.contains(i) { '1' } else { '0' })
            .collect()
    }
}

impl PartialOrd for PointSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PointSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bits.ones().cmp(other.bits.ones())
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra_round_trip() {
        let a = PointSet::from_indices(5, [0, 2, 4]);
        let b = PointSet::from_indices(5, [2, 3]);
        assert_eq!(a.union(&b), PointSet::from_indices(5, [0, 2, 3, 4]));
        assert_eq!(a.intersection(&b), PointSet::singleton(5, 2));
        assert_eq!(a.difference(&b), PointSet::from_indices(5, [0, 4]));
        assert_eq!(a.complement(), PointSet::from_indices(5, [1, 3]));
        assert_eq!(a.to_bit_string(), "10101");
        assert_eq!(PointSet::from_bit_string("10101"), Some(a));
        assert_eq!(PointSet::from_bit_string("10x01"), None);
    }

    #[test]
    fn order_is_lexicographic_on_members() {
        let s0 = PointSet::from_indices(4, [0]);
        let s01 = PointSet::from_indices(4, [0, 1]);
        let s1 = PointSet::from_indices(4, [1]);
        assert!(s0 < s01);
        assert!(s01 < s1);
        let mut v = vec![s1.clone(), s0.clone(), s01.clone()];
        v.sort();
        assert_eq!(v, vec![s0, s01, s1]);
    }

    #[test]
    fn mask_round_trip() {
        let s = PointSet::from_indices(8, [1, 3, 7]);
        assert_eq!(s.as_mask(), 0b1000_1010);
        assert_eq!(PointSet::from_mask(8, 0b1000_1010), s);
    }
}
