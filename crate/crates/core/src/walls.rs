//! Walls and half-spaces.
//!
//! A half-space is a convex set with convex complement; equivalently its
//! indicator is a median morphism onto the two-point algebra. A wall is the
//! unordered pair of a half-space and its complement. Walls are stored by
//! their canonical side, the one containing point 0, which fixes an
//! orientation and an ordering once and for all.
//!
//! For embedded algebras the walls are exactly the non-constant coordinate
//! splits of the embedding: each split of a majority-closed set has convex
//! sides, and conversely any half-space indicator extends along the ambient
//! cube, so no wall is missed. Dense algebras fall back to a subset scan.

use crate::algebra::MedianAlgebra;
use crate::error::{Error, Result};
use crate::set::PointSet;
use std::collections::HashSet;

/// Largest carrier for the dense subset scan (`2^(n-1)` candidate sides).
const SCAN_LIMIT: usize = 24;

/// A wall, stored by the side containing point 0.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Wall {
    side: PointSet,
}

impl Wall {
    pub(crate) fn from_canonical_side(side: PointSet) -> Self {
        debug_assert!(side.contains(0));
        Wall { side }
    }

    /// The side containing point 0.
    pub fn side(&self) -> &PointSet {
        &self.side
    }

    /// The other side.
    pub fn coside(&self) -> PointSet {
        self.side.complement()
    }

    /// The side containing `x`.
    pub fn side_of(&self, x: usize) -> PointSet {
        if self.side.contains(x) {
            self.side.clone()
        } else {
            self.coside()
        }
    }

    /// Whether `x` and `y` lie on opposite sides.
    pub fn separates(&self, x: usize, y: usize) -> bool {
        self.side.contains(x) != self.side.contains(y)
    }
}

/// An oriented wall: one chosen side.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfSpace {
    pub side: PointSet,
}

/// All walls of the algebra, sorted by canonical side.
pub fn enumerate(m: &MedianAlgebra) -> Result<Vec<Wall>> {
    if m.n() == 1 {
        return Ok(Vec::new());
    }
    let mut sides: Vec<PointSet> = if let Some(emb) = m.embedding() {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for coord in 0..emb.width() {
            let base = emb.bit(0, coord);
            let side = PointSet::from_indices(
                m.n(),
                (0..m.n()).filter(|&x| emb.bit(x, coord) == base),
            );
            if side.count() == m.n() {
                continue; // constant coordinate
            }
            debug_assert!(m.n() > 24 || m.is_convex(&side) && m.is_convex(&side.complement()));
            if seen.insert(side.clone()) {
                out.push(side);
            }
        }
        out
    } else {
        scan_dense(m)?
    };
    sides.sort();
    Ok(sides.into_iter().map(Wall::from_canonical_side).collect())
}

/// Subset scan over candidate sides containing point 0. Convexity of a side
/// is checked against precomputed interval masks.
fn scan_dense(m: &MedianAlgebra) -> Result<Vec<PointSet>> {
    let n = m.n();
    if n > SCAN_LIMIT {
        return Err(Error::TooLarge {
            what: "wall scan carrier",
            limit: SCAN_LIMIT,
            actual: n,
        });
    }
    let mut interval = vec![0u32; n * n];
    for x in 0..n {
        for y in x..n {
            let mut bits = 0u32;
            for z in 0..n {
                if m.interval_contains(x, y, z) {
                    bits |= 1 << z;
                }
            }
            interval[x * n + y] = bits;
            interval[y * n + x] = bits;
        }
    }
    let convex = |mask: u32| -> bool {
        let mut rest = mask;
        while rest != 0 {
            let x = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let mut others = rest | 1 << x;
            while others != 0 {
                let y = others.trailing_zeros() as usize;
                others &= others - 1;
                if interval[x * n + y] & !mask != 0 {
                    return false;
                }
            }
        }
        true
    };
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let mut out = Vec::new();
    let mut side: u32 = 1;
    while side < full {
        if convex(side) && convex(full & !side) {
            out.push(PointSet::from_mask(n, side));
        }
        side += 2; // keep point 0 inside the candidate side
    }
    Ok(out)
}

/// Half-spaces containing `a` and missing `b`: the separator set of the pair.
pub fn delta(m: &MedianAlgebra, a: &PointSet, b: &PointSet) -> Result<Vec<HalfSpace>> {
    let mut out = Vec::new();
    for w in m.walls()? {
        for side in [w.side().clone(), w.coside()] {
            if a.is_subset(&side) && side.is_disjoint(b) {
                out.push(HalfSpace { side });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// A point `a` of the gated (convex) set `a_set` whose personal separator set
/// against `b` already equals the separator set of the whole pair:
/// delta(a_set, b) = delta({a}, b). Scans members in ascending order and
/// returns the first match; errors if none exists.
pub fn gate_separator_point(
    m: &MedianAlgebra,
    a_set: &crate::algebra::ConvexSet,
    b: &PointSet,
) -> Result<usize> {
    assert!(!a_set.is_empty() && !b.is_empty(), "separator sets need nonempty inputs");
    assert!(a_set.members().is_disjoint(b), "separator sets need disjoint inputs");
    let joint = delta(m, a_set.members(), b)?;
    for a in a_set.members().iter() {
        let single = delta(m, &PointSet::singleton(m.n(), a), b)?;
        if single == joint {
            return Ok(a);
        }
    }
    Err(Error::NoWitness)
}

/// Two walls are transverse when all four side intersections are nonempty.
pub fn is_transverse(w1: &Wall, w2: &Wall) -> bool {
    let (a, b) = (w1.side(), &w1.coside());
    let (c, d) = (w2.side(), &w2.coside());
    a.intersects(c) && a.intersects(d) && b.intersects(c) && b.intersects(d)
}

/// The evaluation map into the cube over a chosen set of walls: each point
/// goes to the tuple of canonical-side indicators.
pub struct WallEmbedding {
    /// `rows[x]` is a set over universe `walls.len()`; bit `j` is set when
    /// point `x` lies on the canonical side of wall `j`.
    pub rows: Vec<PointSet>,
    /// Injective, i.e. the chosen walls separate all point pairs.
    pub separating: bool,
    /// Surjective onto the full cube.
    pub transverse: bool,
}

pub fn wall_embedding(m: &MedianAlgebra, walls: &[Wall]) -> WallEmbedding {
    let w = walls.len();
    let rows: Vec<PointSet> = (0..m.n())
        .map(|x| {
            PointSet::from_indices(
                w,
                walls
                    .iter()
                    .enumerate()
                    .filter(|(_, wall)| wall.side().contains(x))
                    .map(|(j, _)| j),
            )
        })
        .collect();
    let distinct: HashSet<&PointSet> = rows.iter().collect();
    let separating = distinct.len() == m.n();
    let transverse = w < 64 && (1usize << w) <= m.n() && distinct.len() == 1 << w;
    WallEmbedding {
        rows,
        separating,
        transverse,
    }
}

/// Walls with members of `a` on both sides.
pub fn halfspaces_cutting(m: &MedianAlgebra, a: &PointSet) -> Result<Vec<Wall>> {
    Ok(m.walls()?
        .iter()
        .filter(|w| w.side().intersects(a) && w.coside().intersects(a))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ConvexSet;

    fn p3() -> MedianAlgebra {
        MedianAlgebra::path(3).unwrap()
    }

    #[test]
    fn p3_has_two_walls() {
        let m = p3();
        let walls = m.walls().unwrap();
        let sides: Vec<PointSet> = walls.iter().map(|w| w.side().clone()).collect();
        assert_eq!(
            sides,
            vec![
                PointSet::from_indices(3, [0]),
                PointSet::from_indices(3, [0, 1]),
            ]
        );
    }

    #[test]
    fn square_has_two_transverse_walls() {
        let m = MedianAlgebra::hypercube(2).unwrap();
        let walls = m.walls().unwrap();
        assert_eq!(walls.len(), 2);
        assert!(is_transverse(&walls[0], &walls[1]));
    }

    #[test]
    fn p3_walls_are_not_transverse() {
        let m = p3();
        let walls = m.walls().unwrap();
        assert!(!is_transverse(&walls[0], &walls[1]));
    }

    #[test]
    fn hypercube_walls_match_dimension() {
        for k in 0..5 {
            let m = MedianAlgebra::hypercube(k).unwrap();
            assert_eq!(m.walls().unwrap().len(), k, "dimension {k}");
        }
    }

    #[test]
    fn dense_scan_agrees_with_coordinate_splits() {
        // Same algebra through both representations.
        let embedded = MedianAlgebra::path(4).unwrap();
        let mut table = vec![0usize; 64];
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    table[(x * 4 + y) * 4 + z] = embedded.med(x, y, z);
                }
            }
        }
        let dense = MedianAlgebra::from_table(4, &table).unwrap();
        let a: Vec<PointSet> = embedded.walls().unwrap().iter().map(|w| w.side().clone()).collect();
        let b: Vec<PointSet> = dense.walls().unwrap().iter().map(|w| w.side().clone()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn delta_on_p3() {
        let m = p3();
        let a = PointSet::from_indices(3, [0]);
        let b = PointSet::from_indices(3, [2]);
        let sep = delta(&m, &a, &b).unwrap();
        let sides: Vec<PointSet> = sep.into_iter().map(|h| h.side).collect();
        assert_eq!(
            sides,
            vec![
                PointSet::from_indices(3, [0]),
                PointSet::from_indices(3, [0, 1]),
            ]
        );
        // Nothing separates adjacent intervals that share a point.
        let sep = delta(&m, &PointSet::from_indices(3, [0, 1]), &PointSet::from_indices(3, [1, 2]));
        assert!(sep.unwrap().is_empty());
    }

    #[test]
    fn separator_point_on_p3() {
        // A = {0, 1} is closer to B = {2} through 1.
        let m = p3();
        let a = ConvexSet::new(&m, PointSet::from_indices(3, [0, 1])).unwrap();
        let b = PointSet::from_indices(3, [2]);
        assert_eq!(gate_separator_point(&m, &a, &b).unwrap(), 1);
    }

    #[test]
    fn separator_point_on_square_edge() {
        // A = left edge {00, 01}, B = {11}; the separator point is 01.
        let m = MedianAlgebra::hypercube(2).unwrap();
        let a = ConvexSet::new(&m, PointSet::from_indices(4, [0, 1])).unwrap();
        let b = PointSet::from_indices(4, [3]);
        assert_eq!(gate_separator_point(&m, &a, &b).unwrap(), 1);
    }

    #[test]
    fn separator_point_exists_for_all_convex_pairs_in_cube() {
        let m = MedianAlgebra::hypercube(3).unwrap();
        for amask in 1u32..256 {
            let aset = PointSet::from_mask(8, amask);
            if !m.is_convex(&aset) {
                continue;
            }
            let a = ConvexSet::new(&m, aset.clone()).unwrap();
            for bmask in 1u32..256 {
                let b = PointSet::from_mask(8, bmask);
                if !aset.is_disjoint(&b) {
                    continue;
                }
                let point = gate_separator_point(&m, &a, &b).unwrap();
                assert!(aset.contains(point));
            }
        }
    }

    #[test]
    fn wall_embedding_of_cube_is_bijective() {
        let m = MedianAlgebra::hypercube(3).unwrap();
        let walls = m.walls().unwrap();
        let emb = wall_embedding(&m, walls);
        assert!(emb.separating);
        assert!(emb.transverse);
        // Point 0 sits on every canonical side.
        assert_eq!(emb.rows[0].count(), 3);
    }

    #[test]
    fn wall_embedding_of_p3_separates_but_is_not_transverse() {
        let m = p3();
        let walls = m.walls().unwrap();
        let emb = wall_embedding(&m, walls);
        assert!(emb.separating);
        assert!(!emb.transverse);
    }

    #[test]
    fn indicator_of_half_space_is_a_morphism() {
        // Every wall side in both algebras, checked as a map to {0, 1}.
        let two = MedianAlgebra::hypercube(1).unwrap();
        for m in [p3(), MedianAlgebra::hypercube(3).unwrap()] {
            for w in m.walls().unwrap() {
                let map: Vec<usize> = (0..m.n())
                    .map(|x| usize::from(w.side().contains(x)))
                    .collect();
                assert_eq!(m.morphism_witness(&two, &map), None);
            }
        }
    }

    #[test]
    fn cutting_walls_of_an_edge() {
        let m = MedianAlgebra::hypercube(2).unwrap();
        let edge = PointSet::from_indices(4, [0, 1]);
        let cutting = halfspaces_cutting(&m, &edge).unwrap();
        assert_eq!(cutting.len(), 1);
        assert!(cutting[0].separates(0, 1));
    }
}
