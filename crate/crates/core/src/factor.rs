//! The maximal cubical factor.
//!
//! Splitting the walls into those transverse to every other wall and the
//! rest decomposes the algebra as a product: the transverse family cuts the
//! carrier into `2^q` fibers, pairwise isomorphic through gate projections,
//! and the algebra is the product of any one fiber with the `q`-cube of sign
//! patterns. The fiber factor has no such walls left, so the cube factor is
//! as large as it can be.
//!
//! A surjective morphism onto a cube picks, for each target coordinate, one
//! oriented half-space; surjectivity forces the chosen walls to be distinct
//! and pairwise transverse. Whether such a morphism factors through the
//! cubical factor is a question about its fibers, answered pointwise.

use crate::action::{validate_action, GroupAction};
use crate::algebra::{ConvexSet, MedianAlgebra};
use crate::cubes::cube_witness;
use crate::error::{Error, Result};
use crate::set::PointSet;
use crate::walls::Wall;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::sync::Arc;

const FULL_TRIPLE_LIMIT: usize = 126;
const VALIDATION_SAMPLES: usize = 1_000_000;
const VALIDATION_SEED: u64 = 0x6661_6374_6f72;

/// Splits the walls into the pairwise-transverse core (every listed wall
/// meets all four corners with every other wall) and the remainder.
pub fn classify_walls(m: &MedianAlgebra) -> Result<(Vec<Wall>, Vec<Wall>)> {
    let walls = m.walls()?;
    let sides: Vec<&PointSet> = walls.iter().map(Wall::side).collect();
    let cosides: Vec<PointSet> = walls.iter().map(Wall::coside).collect();
    let transverse = |i: usize, j: usize| -> bool {
        sides[i].intersects(sides[j])
            && sides[i].intersects(&cosides[j])
            && cosides[i].intersects(sides[j])
            && cosides[i].intersects(&cosides[j])
    };
    let mut w1 = Vec::new();
    let mut w2 = Vec::new();
    for i in 0..walls.len() {
        if (0..walls.len()).all(|j| j == i || transverse(i, j)) {
            w1.push(walls[i].clone());
        } else {
            w2.push(walls[i].clone());
        }
    }
    Ok((w1, w2))
}

/// The verified decomposition `M = M' x {0,1}^q`.
pub struct Decomposition {
    w1: Vec<Wall>,
    w2: Vec<Wall>,
    cube_dim: usize,
    m_prime: MedianAlgebra,
    /// Base-fiber member list: `m_prime` point `i` is ambient point `fiber[i]`.
    fiber: Vec<usize>,
    /// Ambient point to `m_prime` index, via the gate onto the base fiber.
    fiber_proj: Vec<usize>,
    /// Ambient point to cube coordinates: bit `j` set when the point lies on
    /// the canonical side of the `j`-th transverse wall.
    cube_proj: Vec<u32>,
    /// Slot `(i << cube_dim) | mask` holds the unique ambient point with
    /// fiber index `i` and cube coordinates `mask`.
    inverse: Vec<usize>,
}

impl Decomposition {
    pub fn w1(&self) -> &[Wall] {
        &self.w1
    }

    pub fn w2(&self) -> &[Wall] {
        &self.w2
    }

    pub fn cube_dim(&self) -> usize {
        self.cube_dim
    }

    pub fn m_prime(&self) -> &MedianAlgebra {
        &self.m_prime
    }

    pub fn base_fiber(&self) -> &[usize] {
        &self.fiber
    }

    /// Image of an ambient point: `(m_prime index, cube coordinates)`.
    pub fn iso(&self, x: usize) -> (usize, u32) {
        (self.fiber_proj[x], self.cube_proj[x])
    }

    /// Preimage of a factor pair.
    pub fn point_at(&self, mp: usize, mask: u32) -> usize {
        self.inverse[(mp << self.cube_dim) | mask as usize]
    }

    pub fn cube_algebra(&self) -> MedianAlgebra {
        MedianAlgebra::hypercube(self.cube_dim).expect("cube dimension within bounds")
    }
}

/// Computes and fully verifies the decomposition: fiber count, pairwise
/// fiber isomorphisms through gates, and the median law for the combined
/// point map (exhaustively on small carriers, sampled on large ones).
pub fn cubical_factor(m: &MedianAlgebra) -> Result<Decomposition> {
    let n = m.n();
    let (w1, w2) = classify_walls(m)?;
    let q = w1.len();
    if n.checked_shr(q as u32).unwrap_or(0) == 0 {
        return Err(Error::InternalInconsistency {
            context: format!(
                "{q} pairwise transverse walls need {} sign patterns, more than n = {n}",
                1usize << q
            ),
        });
    }
    let mut cube_proj = vec![0u32; n];
    for (j, wall) in w1.iter().enumerate() {
        for x in wall.side().iter() {
            cube_proj[x] |= 1 << j;
        }
    }
    let patterns = 1usize << q;
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); patterns];
    for x in 0..n {
        fibers[cube_proj[x] as usize].push(x);
    }
    if fibers.iter().any(Vec::is_empty) {
        return Err(Error::InternalInconsistency {
            context: "a sign pattern of the transverse walls has an empty fiber".into(),
        });
    }
    if !n.is_multiple_of(patterns) || fibers.iter().any(|f| f.len() != n / patterns) {
        return Err(Error::InternalInconsistency {
            context: "fibers of the transverse walls differ in size".into(),
        });
    }
    // Canonical sides all contain point 0, so its fiber is the all-ones one.
    debug_assert_eq!(cube_proj[0], (patterns - 1) as u32);
    let fiber: Vec<usize> = fibers[patterns - 1].clone();
    let base_set = PointSet::from_indices(n, fiber.iter().copied());
    let base_convex = ConvexSet::trusted(base_set.clone(), fiber.clone());
    debug_assert!(n > 64 || m.is_convex(&base_set));
    let (m_prime, _) = m.restrict_unchecked(&base_set);

    let mut index_in_fiber = vec![usize::MAX; n];
    for (i, &p) in fiber.iter().enumerate() {
        index_in_fiber[p] = i;
    }
    let mut fiber_proj = vec![0usize; n];
    for x in 0..n {
        let g = m.gate(x, &base_convex);
        debug_assert!(index_in_fiber[g] != usize::MAX);
        fiber_proj[x] = index_in_fiber[g];
    }

    let mut inverse = vec![usize::MAX; fiber.len() << q];
    for x in 0..n {
        let slot = (fiber_proj[x] << q) | cube_proj[x] as usize;
        if inverse[slot] != usize::MAX {
            return Err(Error::InternalInconsistency {
                context: format!(
                    "points {} and {x} agree in both factors; the point map is not injective",
                    inverse[slot]
                ),
            });
        }
        inverse[slot] = x;
    }

    // Each fiber must be the isomorphic gate image of the base fiber.
    for (mask, members) in fibers.iter().enumerate() {
        let target_set = PointSet::from_indices(n, members.iter().copied());
        let target = ConvexSet::trusted(target_set.clone(), members.clone());
        let image: Vec<usize> = fiber.iter().map(|&p| m.gate(p, &target)).collect();
        let image_set = PointSet::from_indices(n, image.iter().copied());
        if image_set != target_set {
            return Err(Error::InternalInconsistency {
                context: format!("gate image of the base fiber misses fiber {mask:#b}"),
            });
        }
        if let Some((x, y, z)) = m_prime.morphism_witness(m, &image) {
            return Err(Error::InternalInconsistency {
                context: format!(
                    "gate projection onto fiber {mask:#b} breaks the median law at ({x}, {y}, {z})"
                ),
            });
        }
    }

    // The combined map must carry med to med componentwise.
    let check = |x: usize, y: usize, z: usize| -> bool {
        let w = m.med(x, y, z);
        let (cx, cy, cz) = (cube_proj[x], cube_proj[y], cube_proj[z]);
        cube_proj[w] == (cx & cy | cx & cz | cy & cz)
            && fiber_proj[w] == m_prime.med(fiber_proj[x], fiber_proj[y], fiber_proj[z])
    };
    let mut violation = None;
    if n <= FULL_TRIPLE_LIMIT {
        'scan: for x in 0..n {
            for y in x..n {
                for z in y..n {
                    if !check(x, y, z) {
                        violation = Some((x, y, z));
                        break 'scan;
                    }
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        for _ in 0..VALIDATION_SAMPLES {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            let z = rng.gen_range(0..n);
            if !check(x, y, z) {
                violation = Some((x, y, z));
                break;
            }
        }
    }
    if let Some((x, y, z)) = violation {
        return Err(Error::InternalInconsistency {
            context: format!("factor map breaks the median law at ({x}, {y}, {z})"),
        });
    }

    Ok(Decomposition {
        w1,
        w2,
        cube_dim: q,
        m_prime,
        fiber,
        fiber_proj,
        cube_proj,
        inverse,
    })
}

/// All surjective median morphisms onto `{0,1}^dim`, as point maps. Each
/// target coordinate pulls back to an oriented half-space; surjectivity
/// makes the walls distinct and pairwise transverse, and conversely any such
/// tuple is surjective, so ordered transverse tuples enumerate the morphisms
/// exactly. Bit `j` of the image is membership in the chosen side of slot `j`.
pub fn surjective_cube_morphisms(m: &MedianAlgebra, dim: usize) -> Result<Vec<Vec<usize>>> {
    if dim > 20 {
        return Err(Error::TooLarge {
            what: "target cube dimension",
            limit: 20,
            actual: dim,
        });
    }
    let walls = m.walls()?;
    let w = walls.len();
    let transverse: Vec<Vec<bool>> = (0..w)
        .map(|i| {
            (0..w)
                .map(|j| i != j && crate::walls::is_transverse(&walls[i], &walls[j]))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut chosen: Vec<(usize, bool)> = Vec::new();
    build_tuples(m, walls, &transverse, dim, &mut chosen, &mut out);
    for map in &out {
        let distinct: HashSet<usize> = map.iter().copied().collect();
        if distinct.len() != 1 << dim {
            return Err(Error::InternalInconsistency {
                context: "a transverse tuple failed to reach every cube point".into(),
            });
        }
    }
    Ok(out)
}

fn build_tuples(
    m: &MedianAlgebra,
    walls: &[Wall],
    transverse: &[Vec<bool>],
    dim: usize,
    chosen: &mut Vec<(usize, bool)>,
    out: &mut Vec<Vec<usize>>,
) {
    if chosen.len() == dim {
        let mut map = vec![0usize; m.n()];
        for (slot, &(wall, flip)) in chosen.iter().enumerate() {
            let side = if flip {
                walls[wall].coside()
            } else {
                walls[wall].side().clone()
            };
            for x in side.iter() {
                map[x] |= 1 << slot;
            }
        }
        out.push(map);
        return;
    }
    for wall in 0..walls.len() {
        if chosen.iter().all(|&(prev, _)| transverse[prev][wall]) {
            for flip in [false, true] {
                chosen.push((wall, flip));
                build_tuples(m, walls, transverse, dim, chosen, out);
                chosen.pop();
            }
        }
    }
}

/// Factors a surjective morphism `phi` onto the cube `target` through the
/// cubical factor projection, returning the map on cube points. Fails when
/// two points of one fiber disagree under `phi`.
pub fn factor_through_cube(
    m: &MedianAlgebra,
    phi: &[usize],
    target: &MedianAlgebra,
) -> Result<Vec<usize>> {
    if phi.len() != m.n() {
        return Err(Error::NotFactorizable {
            reason: format!("map has length {}, expected {}", phi.len(), m.n()),
        });
    }
    if let Some(&bad) = phi.iter().find(|&&v| v >= target.n()) {
        return Err(Error::NotFactorizable {
            reason: format!("image {bad} is out of range for the target"),
        });
    }
    cube_witness(target, &PointSet::full(target.n())).map_err(|e| Error::NotFactorizable {
        reason: format!("target is not a cube: {e}"),
    })?;
    if let Some((x, y, z)) = m.morphism_witness(target, phi) {
        return Err(Error::NotFactorizable {
            reason: format!("map is not a median morphism; witness triple ({x}, {y}, {z})"),
        });
    }
    let image: HashSet<usize> = phi.iter().copied().collect();
    if image.len() != target.n() {
        return Err(Error::NotFactorizable {
            reason: format!(
                "map reaches {} of {} target points; it must be surjective",
                image.len(),
                target.n()
            ),
        });
    }
    let dec = cubical_factor(m)?;
    let patterns = 1usize << dec.cube_dim;
    let mut psi = vec![usize::MAX; patterns];
    let mut first = vec![usize::MAX; patterns];
    for x in 0..m.n() {
        let c = dec.cube_proj[x] as usize;
        if psi[c] == usize::MAX {
            psi[c] = phi[x];
            first[c] = x;
        } else if psi[c] != phi[x] {
            return Err(Error::NotFactorizable {
                reason: format!(
                    "points {} and {x} lie in the same fiber of the cube projection \
                     but map to {} and {}",
                    first[c], psi[c], phi[x]
                ),
            });
        }
    }
    // A set-level factorization of a surjective morphism is itself a
    // morphism; re-check and treat failure as a bug.
    let cube = dec.cube_algebra();
    if let Some((x, y, z)) = cube.morphism_witness(target, &psi) {
        return Err(Error::InternalInconsistency {
            context: format!(
                "factored map breaks the median law at cube triple ({x}, {y}, {z})"
            ),
        });
    }
    Ok(psi)
}

/// Whether each generator maps the transverse wall family to itself. The
/// generators are automorphisms, so this holds whenever the decomposition
/// came from `cubical_factor`; the check is still made from scratch.
pub fn is_equivariant_decomposition(action: &GroupAction, dec: &Decomposition) -> bool {
    let m = action.algebra();
    let w1_sides: HashSet<&PointSet> = dec.w1.iter().map(Wall::side).collect();
    for (_, g) in action.generators() {
        for wall in &dec.w1 {
            let mut image = PointSet::empty(m.n());
            for x in wall.side().iter() {
                image.insert(g.apply(x));
            }
            let canonical = if image.contains(0) {
                image
            } else {
                image.complement()
            };
            if !w1_sides.contains(&canonical) {
                return false;
            }
        }
    }
    true
}

/// Pushes an action through the decomposition: each generator induces an
/// automorphism of the fiber factor (conjugated by gates) and of the cube
/// (on sign patterns). Both induced actions are re-validated from scratch.
pub fn induced_cube_action(
    action: &GroupAction,
    dec: &Decomposition,
) -> Result<(GroupAction, GroupAction)> {
    let m = action.algebra();
    let n = m.n();
    let patterns = 1usize << dec.cube_dim;
    let mut prime_gens = Vec::new();
    let mut cube_gens = Vec::new();
    for (name, g) in action.generators() {
        let mut cube_map = vec![usize::MAX; patterns];
        for x in 0..n {
            let from = dec.cube_proj[x] as usize;
            let to = dec.cube_proj[g.apply(x)] as usize;
            if cube_map[from] == usize::MAX {
                cube_map[from] = to;
            } else if cube_map[from] != to {
                return Err(Error::NotEquivariant {
                    generator: name.clone(),
                });
            }
        }
        let prime_map: Vec<usize> = dec
            .fiber
            .iter()
            .map(|&p| dec.fiber_proj[g.apply(p)])
            .collect();
        prime_gens.push((name.clone(), prime_map));
        cube_gens.push((name.clone(), cube_map));
    }
    let prime_action = validate_action(Arc::new(dec.m_prime.clone()), &prime_gens)?;
    let cube_action = validate_action(Arc::new(dec.cube_algebra()), &cube_gens)?;
    Ok((prime_action, cube_action))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> MedianAlgebra {
        MedianAlgebra::path(3).unwrap()
    }

    fn p3_x_c2() -> MedianAlgebra {
        MedianAlgebra::product(&p3(), &MedianAlgebra::hypercube(1).unwrap()).unwrap()
    }

    #[test]
    fn cube_walls_are_all_transverse() {
        let m = MedianAlgebra::hypercube(3).unwrap();
        let (w1, w2) = classify_walls(&m).unwrap();
        assert_eq!((w1.len(), w2.len()), (3, 0));
    }

    #[test]
    fn path_walls_are_all_nested() {
        let m = MedianAlgebra::path(4).unwrap();
        let (w1, w2) = classify_walls(&m).unwrap();
        assert_eq!((w1.len(), w2.len()), (0, 3));
    }

    #[test]
    fn product_splits_off_exactly_the_sign_wall() {
        let m = p3_x_c2();
        let (w1, w2) = classify_walls(&m).unwrap();
        assert_eq!((w1.len(), w2.len()), (1, 2));
    }

    #[test]
    fn factor_of_a_cube_is_trivial_fiber() {
        let dec = cubical_factor(&MedianAlgebra::hypercube(3).unwrap()).unwrap();
        assert_eq!(dec.cube_dim(), 3);
        assert_eq!(dec.m_prime().n(), 1);
        // The base fiber is the one through point 0.
        assert_eq!(dec.base_fiber(), &[0]);
    }

    #[test]
    fn factor_of_a_path_is_the_path_itself() {
        let dec = cubical_factor(&p3()).unwrap();
        assert_eq!(dec.cube_dim(), 0);
        assert_eq!(dec.m_prime().n(), 3);
        for x in 0..3 {
            assert_eq!(dec.iso(x), (x, 0));
        }
    }

    #[test]
    fn factor_of_the_product_recovers_both_parts() {
        let m = p3_x_c2();
        let dec = cubical_factor(&m).unwrap();
        assert_eq!(dec.cube_dim(), 1);
        assert_eq!(dec.m_prime().n(), 3);
        // Point (p, s) has index 2p + s; the base fiber is the sign of 0.
        assert_eq!(dec.base_fiber(), &[0, 2, 4]);
        for p in 0..3 {
            for s in 0..2 {
                let (mp, mask) = dec.iso(2 * p + s);
                assert_eq!(mp, p);
                assert_eq!(mask, 1 - s as u32);
                assert_eq!(dec.point_at(mp, mask), 2 * p + s);
            }
        }
    }

    #[test]
    fn fiber_factor_has_no_transverse_walls_left() {
        for m in [p3_x_c2(), MedianAlgebra::hypercube(3).unwrap(), p3()] {
            let dec = cubical_factor(&m).unwrap();
            let (w1, _) = classify_walls(dec.m_prime()).unwrap();
            assert!(w1.is_empty(), "fiber of {m:?} still splits off a cube");
        }
    }

    #[test]
    fn factor_sizes_multiply_back() {
        for m in [
            p3(),
            p3_x_c2(),
            MedianAlgebra::hypercube(4).unwrap(),
            MedianAlgebra::from_embedding(&["000", "001", "010", "100"]).unwrap(),
        ] {
            let dec = cubical_factor(&m).unwrap();
            assert_eq!(dec.m_prime().n() << dec.cube_dim(), m.n());
        }
    }

    #[test]
    fn sign_projection_factors_through_the_cube() {
        let m = p3_x_c2();
        let target = MedianAlgebra::hypercube(1).unwrap();
        let phi: Vec<usize> = (0..6).map(|i| i % 2).collect();
        let psi = factor_through_cube(&m, &phi, &target).unwrap();
        // Cube coordinate 1 holds the sign-0 points, which map to 0.
        assert_eq!(psi, vec![1, 0]);
        let dec = cubical_factor(&m).unwrap();
        for x in 0..6 {
            assert_eq!(psi[dec.iso(x).1 as usize], phi[x]);
        }
    }

    #[test]
    fn path_morphism_does_not_factor() {
        // The path maps onto {0,1} by cutting a wall, but its cubical factor
        // is trivial, so the one fiber hits both targets.
        let m = p3();
        let target = MedianAlgebra::hypercube(1).unwrap();
        let phi = vec![0, 1, 1];
        assert_eq!(m.morphism_witness(&target, &phi), None);
        let err = factor_through_cube(&m, &phi, &target).unwrap_err();
        assert!(matches!(err, Error::NotFactorizable { .. }));
    }

    #[test]
    fn non_surjective_maps_are_rejected() {
        let m = p3();
        let target = MedianAlgebra::hypercube(1).unwrap();
        let err = factor_through_cube(&m, &[0, 0, 0], &target).unwrap_err();
        assert!(matches!(err, Error::NotFactorizable { .. }));
    }

    /// Every function into the cube, filtered by the morphism law; slow but
    /// representation independent.
    fn raw_surjective_morphisms(m: &MedianAlgebra, dim: usize) -> Vec<Vec<usize>> {
        let target = MedianAlgebra::hypercube(dim).unwrap();
        let t = target.n();
        let total = t.pow(m.n() as u32);
        let mut out = Vec::new();
        for code in 0..total {
            let mut map = Vec::with_capacity(m.n());
            let mut rest = code;
            for _ in 0..m.n() {
                map.push(rest % t);
                rest /= t;
            }
            let distinct: HashSet<usize> = map.iter().copied().collect();
            if distinct.len() == t && m.morphism_witness(&target, &map).is_none() {
                out.push(map);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn cube_morphism_enumeration_matches_raw_scan() {
        for (m, dim) in [
            (p3(), 1),
            (MedianAlgebra::hypercube(2).unwrap(), 1),
            (MedianAlgebra::hypercube(2).unwrap(), 2),
            (p3_x_c2(), 1),
        ] {
            let mut fast = surjective_cube_morphisms(&m, dim).unwrap();
            fast.sort();
            let raw = raw_surjective_morphisms(&m, dim);
            assert_eq!(fast, raw, "algebra {m:?}, dim {dim}");
        }
    }

    #[test]
    fn square_admits_eight_self_morphisms() {
        let m = MedianAlgebra::hypercube(2).unwrap();
        assert_eq!(surjective_cube_morphisms(&m, 2).unwrap().len(), 8);
        assert_eq!(surjective_cube_morphisms(&m, 1).unwrap().len(), 4);
    }

    #[test]
    fn zero_dimensional_target_accepts_everything_once() {
        let m = p3();
        let maps = surjective_cube_morphisms(&m, 0).unwrap();
        assert_eq!(maps, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn sign_flip_action_induces_the_cube_swap() {
        let m = Arc::new(p3_x_c2());
        let flip: Vec<usize> = (0..6).map(|i| i ^ 1).collect();
        let action = validate_action(m, &[("s".into(), flip)]).unwrap();
        let dec = cubical_factor(action.algebra()).unwrap();
        assert!(is_equivariant_decomposition(&action, &dec));
        let (prime, cube) = induced_cube_action(&action, &dec).unwrap();
        assert!(prime.generator("s").unwrap().is_identity());
        assert_eq!(cube.generator("s").unwrap().as_map(), vec![1, 0]);
    }

    #[test]
    fn rotation_action_induces_a_cube_rotation() {
        let m = Arc::new(MedianAlgebra::hypercube(2).unwrap());
        let action = validate_action(m, &[("r".into(), vec![1, 3, 0, 2])]).unwrap();
        let dec = cubical_factor(action.algebra()).unwrap();
        assert!(is_equivariant_decomposition(&action, &dec));
        let (prime, cube) = induced_cube_action(&action, &dec).unwrap();
        assert_eq!(prime.algebra().n(), 1);
        let r = cube.generator("r").unwrap();
        let mut order = 1;
        let mut acc = r.clone();
        while !acc.is_identity() {
            acc = acc.compose(r);
            order += 1;
        }
        assert_eq!(order, 4);
    }
}
