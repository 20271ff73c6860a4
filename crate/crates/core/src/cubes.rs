//! Cubes inside a median algebra.
//!
//! A subset is a cube when it is median closed and isomorphic, as an algebra
//! in its own right, to `{0,1}^d`. Any two-element subset qualifies (it is a
//! 1-cube even when the points are far apart in the ambient algebra), so
//! cubes measure abstract structure, not adjacency.
//!
//! The antipode of `x` in a set `A` is the point `y` with `med(x, y, z) = z`
//! for every `z` in `A`, i.e. `A` lies inside `[x, y]`; it is unique when it
//! exists. The ends of `A` are its antipodal points. For median-closed `A`
//! the ends form a cube whenever they are nonempty.

use crate::algebra::MedianAlgebra;
use crate::error::{Error, Result};
use crate::set::PointSet;
use crate::walls::wall_embedding;
use std::collections::HashSet;

/// Largest carrier for exhaustive cube enumeration.
const ENUM_LIMIT: usize = 24;
/// Cubes up to this size get the redundant full isomorphism re-check.
const FULL_ISO_LIMIT: usize = 64;

/// A verified cube: members, their antipodes, and a coordinate labelling
/// witnessing the isomorphism with `{0,1}^dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    members: Vec<usize>,
    set: PointSet,
    dim: usize,
    antipode: Vec<usize>,
    coords: Vec<u32>,
}

impl Cube {
    /// Members in ascending order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn set(&self) -> &PointSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, x: usize) -> bool {
        self.set.contains(x)
    }

    /// The antipode of a member, within this cube.
    pub fn antipode_of(&self, x: usize) -> Option<usize> {
        let i = self.members.binary_search(&x).ok()?;
        Some(self.antipode[i])
    }

    /// Coordinate label of a member under the witnessing isomorphism.
    pub fn coords_of(&self, x: usize) -> Option<u32> {
        let i = self.members.binary_search(&x).ok()?;
        Some(self.coords[i])
    }
}

/// Checks whether `s` is a cube, with a reason on failure.
pub fn cube_witness(m: &MedianAlgebra, s: &PointSet) -> Result<Cube> {
    let count = s.count();
    if count == 0 {
        return Err(Error::NotCube {
            reason: "the empty set is not a cube".into(),
        });
    }
    if !count.is_power_of_two() {
        return Err(Error::NotCube {
            reason: format!("{count} points cannot fill a cube"),
        });
    }
    let dim = count.trailing_zeros() as usize;
    if let Some((x, y, z)) = m.subalgebra_witness(s) {
        return Err(Error::NotCube {
            reason: format!("not median closed: med({x}, {y}, {z}) escapes the set"),
        });
    }
    let members: Vec<usize> = s.iter().collect();
    let mut antipode = Vec::with_capacity(count);
    for &x in &members {
        match antipode_in(m, x, s) {
            Some(y) => antipode.push(y),
            None => {
                return Err(Error::NotCube {
                    reason: format!("point {x} has no antipode in the set"),
                })
            }
        }
    }
    let (r, map) = m.restrict_unchecked(s);
    let rwalls = r.walls()?;
    if rwalls.len() != dim {
        return Err(Error::NotCube {
            reason: format!(
                "{} points but {} walls; a {dim}-cube has exactly {dim}",
                count,
                rwalls.len()
            ),
        });
    }
    let wemb = wall_embedding(&r, rwalls);
    if !wemb.separating || !wemb.transverse {
        return Err(Error::NotCube {
            reason: "wall coordinates do not put the set in bijection with a cube".into(),
        });
    }
    let coords: Vec<u32> = wemb.rows.iter().map(|row| row.as_mask()).collect();
    // The coordinate map is a morphism componentwise (each coordinate is a
    // half-space indicator), so bijectivity already makes it an isomorphism;
    // re-check the triple law anyway while the carrier is small.
    if count <= FULL_ISO_LIMIT {
        for x in 0..count {
            for y in x..count {
                for z in y..count {
                    let maj = coords[x] & coords[y] | coords[x] & coords[z] | coords[y] & coords[z];
                    if coords[r.med(x, y, z)] != maj {
                        return Err(Error::InternalInconsistency {
                            context: format!(
                                "wall coordinates of a cube candidate fail the median law \
                                 at restricted triple ({x}, {y}, {z})"
                            ),
                        });
                    }
                }
            }
        }
    }
    debug_assert_eq!(map, members);
    Ok(Cube {
        members,
        set: s.clone(),
        dim,
        antipode,
        coords,
    })
}

pub fn try_cube(m: &MedianAlgebra, s: &PointSet) -> Option<Cube> {
    cube_witness(m, s).ok()
}

pub fn is_cube(m: &MedianAlgebra, s: &PointSet) -> bool {
    cube_witness(m, s).is_ok()
}

/// The antipode of `x` within `a`: the `y` in `a` with `a` inside `[x, y]`,
/// unique when it exists. With an embedding this reduces to a bounding-box
/// test; `a` lies in `[x, y]` exactly when the coordinatewise AND and OR of
/// `a`'s rows are bracketed by those of `x` and `y`.
pub fn antipode_in(m: &MedianAlgebra, x: usize, a: &PointSet) -> Option<usize> {
    debug_assert!(a.contains(x));
    if let Some(emb) = m.embedding() {
        let words = emb.row(0).len();
        let mut lo = vec![u64::MAX; words];
        let mut hi = vec![0u64; words];
        for p in a.iter() {
            for (w, &bits) in emb.row(p).iter().enumerate() {
                lo[w] &= bits;
                hi[w] |= bits;
            }
        }
        let rx = emb.row(x);
        'candidates: for y in a.iter() {
            let ry = emb.row(y);
            for w in 0..words {
                let pair_lo = rx[w] & ry[w];
                let pair_hi = rx[w] | ry[w];
                if pair_lo & !lo[w] != 0 || hi[w] & !pair_hi != 0 {
                    continue 'candidates;
                }
            }
            return Some(y);
        }
        return None;
    }
    a.iter()
        .find(|&y| a.iter().all(|z| m.med(x, y, z) == z))
}

/// The ends of a median-closed set: its antipodal points. Returns `None`
/// when no point has an antipode (a star has empty ends); otherwise the ends
/// always form a cube, and a failure of that law is reported as an internal
/// inconsistency.
pub fn ends(m: &MedianAlgebra, a: &PointSet) -> Result<Option<Cube>> {
    if a.is_empty() {
        return Ok(None);
    }
    if let Some((x, y, z)) = m.subalgebra_witness(a) {
        let med = m.med(x, y, z);
        return Err(Error::NotSubalgebra { x, y, z, m: med });
    }
    let e = PointSet::from_indices(
        a.universe(),
        a.iter().filter(|&x| antipode_in(m, x, a).is_some()),
    );
    if e.is_empty() {
        return Ok(None);
    }
    match cube_witness(m, &e) {
        Ok(c) => Ok(Some(c)),
        Err(err) => Err(Error::InternalInconsistency {
            context: format!("ends of a median-closed set must form a cube: {err}"),
        }),
    }
}

/// Every cube, by dimension: singletons, then all pairs, then each higher
/// cube as a disjoint union of two lower ones (splitting a cube along any of
/// its walls produces such a pair, so the sweep is complete). Sorted by
/// dimension, then by member set.
pub fn enumerate(m: &MedianAlgebra) -> Result<Vec<Cube>> {
    if m.n() > ENUM_LIMIT {
        return Err(Error::TooLarge {
            what: "cube enumeration carrier",
            limit: ENUM_LIMIT,
            actual: m.n(),
        });
    }
    let mut seen: HashSet<PointSet> = HashSet::new();
    let mut by_dim: Vec<Vec<Cube>> = Vec::new();
    let singletons: Vec<Cube> = (0..m.n())
        .map(|x| cube_witness(m, &PointSet::singleton(m.n(), x)))
        .collect::<Result<_>>()?;
    seen.extend(singletons.iter().map(|c| c.set.clone()));
    by_dim.push(singletons);
    loop {
        let last = by_dim.last().unwrap();
        let mut next = Vec::new();
        for (i, a) in last.iter().enumerate() {
            for b in &last[i + 1..] {
                if !a.set.is_disjoint(&b.set) {
                    continue;
                }
                let union = a.set.union(&b.set);
                if !seen.insert(union.clone()) {
                    continue;
                }
                if let Some(c) = try_cube(m, &union) {
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(|a, b| a.set.cmp(&b.set));
        by_dim.push(next);
    }
    Ok(by_dim.into_iter().flatten().collect())
}

/// Cubes not strictly contained in another cube.
pub fn maximal(cubes: &[Cube]) -> Vec<Cube> {
    cubes
        .iter()
        .filter(|c| {
            !cubes
                .iter()
                .any(|d| c.set != d.set && c.set.is_subset(&d.set))
        })
        .cloned()
        .collect()
}
