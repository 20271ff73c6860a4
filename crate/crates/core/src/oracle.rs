//! Brute-force reference implementations and the test corpus.
//!
//! Everything here recomputes structure from definitions by exhaustive scan,
//! with no shared shortcuts with the optimized modules, so agreement between
//! the two is evidence rather than tautology. The corpus enumerates all
//! median subalgebras of small hypercubes up to hypercube symmetry; those
//! algebras are the universe the property suites run over.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{ConvexSet, MedianAlgebra};
use crate::cubes;
use crate::error::{Error, Result};
use crate::measure;
use crate::set::PointSet;
use crate::walls;

/// Largest hypercube dimension the corpus enumeration scans.
pub const CORPUS_LIMIT: usize = 4;

/// Largest carrier the brute recheck scans subsets of.
pub const RECHECK_LIMIT: usize = 16;

const HULL_SAMPLE_SEED: u64 = 0x6f72_6163_6c65;
const HULL_SCAN_LIMIT: usize = 10;
const HULL_SAMPLES: usize = 200;

/// One corpus algebra with its provenance.
#[derive(Clone, Debug)]
pub struct CorpusMember {
    pub label: String,
    /// The subset of hypercube vertices the algebra was cut from.
    pub vertices: Vec<usize>,
    pub algebra: MedianAlgebra,
}

#[derive(Clone, Debug)]
pub struct Corpus {
    pub dimension: usize,
    pub members: Vec<CorpusMember>,
}

/// Enumerates every nonempty median-closed subset of {0,1}^k under
/// coordinatewise majority, deduplicated up to hypercube symmetry (signed
/// coordinate permutations). Members are sorted by size and labeled in
/// order.
pub fn enumerate_hypercube_subalgebras(k: usize) -> Result<Corpus> {
    if k > CORPUS_LIMIT {
        return Err(Error::TooLarge {
            what: "corpus hypercube dimension",
            limit: CORPUS_LIMIT,
            actual: k,
        });
    }
    let points = 1usize << k;
    let full: u32 = (1u32 << points) - 1;

    // Point maps of the symmetry group: permute coordinates, then flip a
    // subset of them.
    let mut maps: Vec<Vec<usize>> = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    permutations(&mut perm, 0, &mut |sigma| {
        for flips in 0..points {
            let map: Vec<usize> = (0..points)
                .map(|x| {
                    let y = x ^ flips;
                    let mut image = 0usize;
                    for (to, &from) in sigma.iter().enumerate() {
                        image |= (y >> from & 1) << to;
                    }
                    image
                })
                .collect();
            maps.push(map);
        }
    });

    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut reps: Vec<u32> = Vec::new();
    for mask in 1..=full {
        if !majority_closed(mask, points) {
            continue;
        }
        let canonical = maps
            .iter()
            .map(|map| {
                let mut image = 0u32;
                for x in 0..points {
                    if mask >> x & 1 == 1 {
                        image |= 1 << map[x];
                    }
                }
                image
            })
            .min()
            .expect("symmetry group is nonempty");
        if seen.insert(canonical) {
            reps.push(canonical);
        }
    }
    reps.sort_by_key(|&mask| (mask.count_ones(), mask));

    let mut members = Vec::with_capacity(reps.len());
    for (i, &mask) in reps.iter().enumerate() {
        let vertices: Vec<usize> = (0..points).filter(|&x| mask >> x & 1 == 1).collect();
        let rows: Vec<String> = vertices
            .iter()
            .map(|&x| {
                (0..k)
                    .map(|c| if x >> c & 1 == 1 { '1' } else { '0' })
                    .collect()
            })
            .collect();
        let algebra = MedianAlgebra::from_embedding(&rows)?;
        members.push(CorpusMember {
            label: format!("subalgebra #{} of {{0,1}}^{}", i + 1, k),
            vertices,
            algebra,
        });
    }
    Ok(Corpus {
        dimension: k,
        members,
    })
}

fn permutations(items: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permutations(items, at + 1, visit);
        items.swap(at, i);
    }
}

/// Is a subset of {0,1}^points closed under coordinatewise majority?
fn majority_closed(mask: u32, points: usize) -> bool {
    let members: Vec<usize> = (0..points).filter(|&x| mask >> x & 1 == 1).collect();
    for (i, &x) in members.iter().enumerate() {
        for &y in &members[i..] {
            for &z in &members {
                let med = (x & y) | (x & z) | (y & z);
                if mask >> med & 1 == 0 {
                    return false;
                }
            }
        }
    }
    true
}

/// Counts of structures the brute recheck compared.
#[derive(Clone, Copy, Debug, Default)]
pub struct RecheckReport {
    pub walls: usize,
    pub cubes: usize,
    pub maximal_cubes: usize,
    pub cubical_measures: usize,
    pub hulls: usize,
    pub gates: usize,
}

/// Recomputes walls, cubes, hulls, and gates by definition scans and diffs
/// them against the optimized modules. Any difference is a `Mismatch`; a
/// clean pass returns the counts of compared structures.
pub fn brute_recheck(m: &MedianAlgebra) -> Result<RecheckReport> {
    let n = m.n();
    if n > RECHECK_LIMIT {
        return Err(Error::TooLarge {
            what: "carrier for brute recheck",
            limit: RECHECK_LIMIT,
            actual: n,
        });
    }
    let full: u32 = (1u32 << n) - 1;

    // interval[x][y] holds the members of [x, y] as a bit mask.
    let mut interval = vec![vec![0u32; n]; n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if m.med(x, y, z) == z {
                    interval[x][y] |= 1 << z;
                }
            }
        }
    }
    let convex = |s: u32| -> bool {
        for x in 0..n {
            if s >> x & 1 == 0 {
                continue;
            }
            for y in 0..n {
                if s >> y & 1 == 1 && interval[x][y] & !s != 0 {
                    return false;
                }
            }
        }
        true
    };
    let closed = |s: u32| -> bool {
        let members: Vec<usize> = (0..n).filter(|&x| s >> x & 1 == 1).collect();
        members.iter().enumerate().all(|(i, &x)| {
            members[i..].iter().all(|&y| {
                members
                    .iter()
                    .all(|&z| s >> m.med(x, y, z) & 1 == 1)
            })
        })
    };

    let mut report = RecheckReport::default();

    // Walls: a convex set with convex complement, keyed by the side holding
    // point 0.
    let mut brute_sides: Vec<u32> = Vec::new();
    for s in 1..full {
        if s & 1 == 1 && convex(s) && convex(!s & full) {
            brute_sides.push(s);
        }
    }
    brute_sides.sort_unstable();
    let mut fast_sides: Vec<u32> = walls::enumerate(m)?
        .iter()
        .map(|w| w.side().as_mask())
        .collect();
    fast_sides.sort_unstable();
    if brute_sides != fast_sides {
        return Err(mismatch_sets("walls", &brute_sides, &fast_sides, n));
    }
    report.walls = brute_sides.len();

    // Cubes: median-closed power-of-two subsets carrying an explicit
    // isomorphism onto a hypercube.
    let mut brute_cubes: Vec<(u32, usize)> = Vec::new();
    for s in 1..=full {
        let size = s.count_ones();
        if !size.is_power_of_two() || !closed(s) {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&x| s >> x & 1 == 1).collect();
        if let Some(dim) = find_cube_iso(m, &members) {
            brute_cubes.push((s, dim));
        }
    }
    brute_cubes.sort_unstable();
    let enumerated = cubes::enumerate(m)?;
    let mut fast_cubes: Vec<(u32, usize)> = enumerated
        .iter()
        .map(|c| (c.set().as_mask(), c.dim()))
        .collect();
    fast_cubes.sort_unstable();
    if brute_cubes != fast_cubes {
        let brute_masks: Vec<u32> = brute_cubes.iter().map(|&(s, _)| s).collect();
        let fast_masks: Vec<u32> = fast_cubes.iter().map(|&(s, _)| s).collect();
        return Err(mismatch_sets("cubes", &brute_masks, &fast_masks, n));
    }
    report.cubes = brute_cubes.len();

    // Maximal cubes, independently: not strictly contained in another cube.
    let mut brute_maximal: Vec<u32> = brute_cubes
        .iter()
        .filter(|&&(s, _)| {
            !brute_cubes
                .iter()
                .any(|&(t, _)| t != s && t & s == s)
        })
        .map(|&(s, _)| s)
        .collect();
    brute_maximal.sort_unstable();
    let mut fast_maximal: Vec<u32> = cubes::maximal(&enumerated)
        .iter()
        .map(|c| c.set().as_mask())
        .collect();
    fast_maximal.sort_unstable();
    if brute_maximal != fast_maximal {
        return Err(mismatch_sets(
            "maximal cubes",
            &brute_maximal,
            &fast_maximal,
            n,
        ));
    }
    report.maximal_cubes = brute_maximal.len();

    // Each cube's uniform measure must be exactly fixed by the self-median
    // operator.
    for cube in &enumerated {
        let lambda = measure::cubical_measure(m, cube);
        if measure::phi(m, &lambda) != lambda {
            return Err(Error::Mismatch {
                component: "cubical measures",
                witness: format!("measure on {:?} drifts under the operator", cube.set()),
            });
        }
        report.cubical_measures += 1;
    }

    // Hulls: fixpoint of interval closure against the optimized join pass.
    let seeds: Vec<u32> = if n <= HULL_SCAN_LIMIT {
        (1..=full).collect()
    } else {
        let mut seeds: Vec<u32> = (1..=full)
            .filter(|s| s.count_ones() <= 3)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(HULL_SAMPLE_SEED);
        seeds.extend((0..HULL_SAMPLES).map(|_| rng.gen_range(1..=full)));
        seeds
    };
    for s in seeds {
        let mut hull = s;
        loop {
            let mut next = hull;
            for x in 0..n {
                if hull >> x & 1 == 0 {
                    continue;
                }
                for y in 0..n {
                    if hull >> y & 1 == 1 {
                        next |= interval[x][y];
                    }
                }
            }
            if next == hull {
                break;
            }
            hull = next;
        }
        let fast = m
            .convex_hull(&PointSet::from_mask(n, s))
            .members()
            .as_mask();
        if fast != hull {
            return Err(Error::Mismatch {
                component: "hulls",
                witness: format!(
                    "seed {:?}: scan gives {:?}, hull pass gives {:?}",
                    PointSet::from_mask(n, s),
                    PointSet::from_mask(n, hull),
                    PointSet::from_mask(n, fast)
                ),
            });
        }
        report.hulls += 1;
    }

    // Gates: the unique point of a convex set lying in every interval to it.
    for s in 1..=full {
        if !convex(s) {
            continue;
        }
        let set = PointSet::from_mask(n, s);
        let cs = ConvexSet::new(m, set.clone()).map_err(|e| Error::Mismatch {
            component: "gates",
            witness: format!("scan says {set:?} is convex, but: {e}"),
        })?;
        for x in 0..n {
            if s >> x & 1 == 1 {
                if m.gate(x, &cs) != x {
                    return Err(Error::Mismatch {
                        component: "gates",
                        witness: format!("gate of member {x} in {set:?} is not {x}"),
                    });
                }
                report.gates += 1;
                continue;
            }
            let candidates: Vec<usize> = (0..n)
                .filter(|&y| s >> y & 1 == 1)
                .filter(|&y| (0..n).all(|z| s >> z & 1 == 0 || interval[x][z] >> y & 1 == 1))
                .collect();
            let [gate] = candidates[..] else {
                return Err(Error::Mismatch {
                    component: "gates",
                    witness: format!(
                        "point {x} has candidates {candidates:?} in {set:?}, expected exactly one"
                    ),
                });
            };
            if m.gate(x, &cs) != gate {
                return Err(Error::Mismatch {
                    component: "gates",
                    witness: format!(
                        "gate of {x} in {set:?}: scan gives {gate}, projection gives {}",
                        m.gate(x, &cs)
                    ),
                });
            }
            report.gates += 1;
        }
    }

    Ok(report)
}

fn mismatch_sets(component: &'static str, brute: &[u32], fast: &[u32], n: usize) -> Error {
    let brute_set: BTreeSet<u32> = brute.iter().copied().collect();
    let fast_set: BTreeSet<u32> = fast.iter().copied().collect();
    let only_brute: Vec<PointSet> = brute_set
        .difference(&fast_set)
        .map(|&s| PointSet::from_mask(n, s))
        .collect();
    let only_fast: Vec<PointSet> = fast_set
        .difference(&brute_set)
        .map(|&s| PointSet::from_mask(n, s))
        .collect();
    Error::Mismatch {
        component,
        witness: format!("scan only: {only_brute:?}; optimized only: {only_fast:?}"),
    }
}

/// Searches for an explicit isomorphism from the given median-closed point
/// set onto a hypercube of matching dimension. Returns the dimension on
/// success. The first point is pinned to coordinate zero, which is harmless
/// because cube automorphisms act transitively on vertices.
fn find_cube_iso(m: &MedianAlgebra, members: &[usize]) -> Option<usize> {
    let size = members.len();
    debug_assert!(size.is_power_of_two());
    let dim = size.trailing_zeros() as usize;
    if size == 1 {
        return Some(0);
    }
    let mut position = vec![usize::MAX; m.n()];
    for (i, &x) in members.iter().enumerate() {
        position[x] = i;
    }
    let mut images: Vec<Option<usize>> = vec![None; size];
    let mut used = vec![false; size];
    images[0] = Some(0);
    used[0] = true;
    if assign(m, members, &position, &mut images, &mut used, 1) {
        Some(dim)
    } else {
        None
    }
}

fn assign(
    m: &MedianAlgebra,
    members: &[usize],
    position: &[usize],
    images: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    at: usize,
) -> bool {
    if at == members.len() {
        return true;
    }
    'candidates: for v in 0..members.len() {
        if used[v] {
            continue;
        }
        images[at] = Some(v);
        used[v] = true;
        // Every fully assigned triple must map medians to majorities.
        for i in 0..=at {
            let Some(a) = images[i] else { continue };
            for j in i..=at {
                let Some(b) = images[j] else { continue };
                for k in j..=at {
                    let Some(c) = images[k] else { continue };
                    let med = position[m.med(members[i], members[j], members[k])];
                    let Some(image) = images[med] else { continue };
                    if (a & b) | (a & c) | (b & c) != image {
                        images[at] = None;
                        used[v] = false;
                        continue 'candidates;
                    }
                }
            }
        }
        if assign(m, members, position, images, used, at + 1) {
            return true;
        }
        images[at] = None;
        used[v] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_one_dimensional_corpus_is_a_point_and_an_edge() {
        let corpus = enumerate_hypercube_subalgebras(1).unwrap();
        assert_eq!(corpus.members.len(), 2);
        assert_eq!(corpus.members[0].label, "subalgebra #1 of {0,1}^1");
        assert_eq!(corpus.members[0].algebra.n(), 1);
        assert_eq!(corpus.members[1].algebra.n(), 2);
    }

    #[test]
    fn the_square_corpus_has_five_classes() {
        let corpus = enumerate_hypercube_subalgebras(2).unwrap();
        let sizes: Vec<usize> = corpus.members.iter().map(|c| c.algebra.n()).collect();
        // Point, edge, diagonal pair, three-point path, square.
        assert_eq!(sizes, vec![1, 2, 2, 3, 4]);
        let p3 = &corpus.members[3].algebra;
        assert_eq!(p3.walls().unwrap().len(), 2);
    }

    #[test]
    fn the_cube_corpus_has_thirteen_classes() {
        let corpus = enumerate_hypercube_subalgebras(3).unwrap();
        let sizes: Vec<usize> = corpus.members.iter().map(|c| c.algebra.n()).collect();
        // One point class, three pair classes (edge, face diagonal, long
        // diagonal), two paths, four four-point classes, then 5, 6, 8.
        assert_eq!(sizes, vec![1, 2, 2, 2, 3, 3, 4, 4, 4, 4, 5, 6, 8]);
    }

    #[test]
    fn oversized_corpus_requests_are_rejected() {
        assert!(matches!(
            enumerate_hypercube_subalgebras(5),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn recheck_is_clean_on_the_standard_algebras() {
        let p3 = MedianAlgebra::path(3).unwrap();
        let report = brute_recheck(&p3).unwrap();
        assert_eq!(report.walls, 2);
        assert_eq!(report.cubes, 6);
        assert_eq!(report.maximal_cubes, 3);

        let square = MedianAlgebra::hypercube(2).unwrap();
        let report = brute_recheck(&square).unwrap();
        assert_eq!(report.walls, 2);
        assert_eq!(report.cubes, 11);

        let cube = MedianAlgebra::hypercube(3).unwrap();
        let report = brute_recheck(&cube).unwrap();
        assert_eq!(report.walls, 3);
        assert_eq!(report.cubes, 49);
        assert_eq!(report.maximal_cubes, 1);
    }

    #[test]
    fn the_four_point_star_is_not_mistaken_for_a_square() {
        let star = MedianAlgebra::from_embedding(&["000", "001", "010", "100"]).unwrap();
        // Closed, four points, but no isomorphism onto the square exists.
        assert_eq!(find_cube_iso(&star, &[0, 1, 2, 3]), None);
        let report = brute_recheck(&star).unwrap();
        // Four vertices and every pair, nothing larger.
        assert_eq!(report.cubes, 10);
        assert_eq!(report.maximal_cubes, 6);
    }

    #[test]
    fn every_corpus_member_survives_the_recheck() {
        let corpus = enumerate_hypercube_subalgebras(2).unwrap();
        for member in &corpus.members {
            brute_recheck(&member.algebra)
                .unwrap_or_else(|e| panic!("{} failed: {e}", member.label));
        }
    }
}
