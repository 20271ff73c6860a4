//! Exact measures on a median algebra: the self-median operator, cubical
//! measures, the half-space mass spectrum, group convolution, and the
//! stationary polytope of an action.
//!
//! All reported masses are arbitrary-precision rationals. The fixed-point
//! search iterates at a fixed dyadic precision (denominator 2^40), so every
//! step is exact integer arithmetic and a terminal measure can be compared
//! against the cubical candidates without rounding noise.

use std::collections::{BTreeSet, VecDeque};

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{GroupAction, Permutation};
use crate::algebra::MedianAlgebra;
use crate::cubes::{self, Cube};
use crate::error::{Error, Result};
use crate::set::PointSet;
use crate::walls::Wall;

/// Bit width of the dyadic grid used by the fixed-point search.
pub const DYADIC_BITS: u32 = 40;

const DYADIC_ONE: u64 = 1 << DYADIC_BITS;

/// Cap on group and semigroup closures while deciding whether a step
/// distribution generates the acting group.
pub const GROUP_CLOSURE_CAP: usize = 100_000;

/// A probability measure on the carrier of a median algebra, indexed by
/// point. Weights are exact rationals that sum to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measure {
    weights: Vec<BigRational>,
}

impl Measure {
    /// Validates nonnegativity and total mass one.
    pub fn new(weights: Vec<BigRational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure {
                reason: "empty carrier".into(),
            });
        }
        if let Some(i) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::InvalidMeasure {
                reason: format!("negative weight at point {i}"),
            });
        }
        let total = weights
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + w);
        if !total.is_one() {
            return Err(Error::InvalidMeasure {
                reason: format!("total mass is {total}, not 1"),
            });
        }
        Ok(Measure { weights })
    }

    pub fn dirac(n: usize, x: usize) -> Self {
        assert!(x < n, "dirac point {x} out of range for carrier size {n}");
        let mut weights = vec![BigRational::zero(); n];
        weights[x] = BigRational::one();
        Measure { weights }
    }

    pub fn uniform(n: usize) -> Self {
        Self::uniform_on(n, &PointSet::full(n))
    }

    /// Uniform measure on a nonempty subset of the carrier.
    pub fn uniform_on(n: usize, s: &PointSet) -> Self {
        assert_eq!(s.universe(), n, "support universe does not match carrier");
        assert!(!s.is_empty(), "uniform measure needs a nonempty support");
        let w = BigRational::new(BigInt::one(), BigInt::from(s.count()));
        let mut weights = vec![BigRational::zero(); n];
        for x in s.iter() {
            weights[x] = w.clone();
        }
        Measure { weights }
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, x: usize) -> &BigRational {
        &self.weights[x]
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn support(&self) -> PointSet {
        PointSet::from_indices(
            self.weights.len(),
            (0..self.weights.len()).filter(|&x| !self.weights[x].is_zero()),
        )
    }

    pub fn mass(&self, s: &PointSet) -> BigRational {
        s.iter()
            .fold(BigRational::zero(), |acc, x| acc + &self.weights[x])
    }

    /// Total-variation distance, exactly.
    pub fn tv_distance(&self, other: &Measure) -> BigRational {
        assert_eq!(self.n(), other.n(), "carriers differ");
        let l1 = self
            .weights
            .iter()
            .zip(&other.weights)
            .fold(BigRational::zero(), |acc, (a, b)| acc + (a - b).abs());
        l1 / BigRational::from_integer(2.into())
    }
}

/// Image of a measure under a permutation of the carrier.
pub fn pushforward(g: &Permutation, eta: &Measure) -> Measure {
    assert_eq!(g.n(), eta.n(), "permutation degree does not match carrier");
    let mut weights = vec![BigRational::zero(); eta.n()];
    for x in 0..eta.n() {
        weights[g.apply(x)] = eta.weights[x].clone();
    }
    Measure { weights }
}

/// The self-median operator: the image of the product measure eta^3 under
/// med. Exact.
pub fn phi(m: &MedianAlgebra, eta: &Measure) -> Measure {
    assert_eq!(eta.n(), m.n(), "measure carrier does not match the algebra");
    let support: Vec<usize> = (0..m.n())
        .filter(|&x| !eta.weights[x].is_zero())
        .collect();
    let mut out = vec![BigRational::zero(); m.n()];
    for (i, &x) in support.iter().enumerate() {
        for &y in &support[i..] {
            // med is symmetric in x and y, so one unordered pair carries the
            // weight of both ordered ones.
            let mut pxy = &eta.weights[x] * &eta.weights[y];
            if x != y {
                pxy = &pxy + &pxy;
            }
            for &z in &support {
                out[m.med(x, y, z)] += &pxy * &eta.weights[z];
            }
        }
    }
    Measure { weights: out }
}

/// Uniform measure on the members of a cube: 2^{-dim} per vertex.
pub fn cubical_measure(m: &MedianAlgebra, cube: &Cube) -> Measure {
    let w = BigRational::new(BigInt::one(), BigInt::from(cube.members().len()));
    let mut weights = vec![BigRational::zero(); m.n()];
    for &x in cube.members() {
        weights[x] = w.clone();
    }
    Measure { weights }
}

/// Every cube of the algebra paired with its cubical measure.
pub fn cubical_measures(m: &MedianAlgebra) -> Result<Vec<(Cube, Measure)>> {
    Ok(cubes::enumerate(m)?
        .into_iter()
        .map(|c| {
            let lambda = cubical_measure(m, &c);
            (c, lambda)
        })
        .collect())
}

/// Largest-remainder rounding: floor quotients, then one extra unit to the
/// cells with the biggest remainders, lowest index first on ties. The result
/// sums exactly to `target`.
fn apportion(quotients: Vec<u64>, remainders: &[u128], target: u64) -> Vec<u64> {
    let base: u64 = quotients.iter().sum();
    debug_assert!(base <= target);
    let deficit = (target - base) as usize;
    let mut order: Vec<usize> = (0..quotients.len()).collect();
    order.sort_by(|&a, &b| remainders[b].cmp(&remainders[a]).then(a.cmp(&b)));
    let mut out = quotients;
    for &i in order.iter().take(deficit) {
        out[i] += 1;
    }
    out
}

/// Scales positive integer weights onto the dyadic grid, total 2^40.
fn normalize_to_dyadic(weights: &[u64]) -> Vec<u64> {
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    assert!(total > 0, "weights must not all be zero");
    let mut quotients = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for &w in weights {
        let scaled = (w as u128) << DYADIC_BITS;
        quotients.push((scaled / total) as u64);
        remainders.push(scaled % total);
    }
    apportion(quotients, &remainders, DYADIC_ONE)
}

/// One exact dyadic step of the self-median operator. The triple products
/// sum to 2^120; the top 40 bits of each cell survive, and largest-remainder
/// rounding repairs the total.
fn dyadic_phi_step(m: &MedianAlgebra, w: &[u64]) -> Vec<u64> {
    let support: Vec<usize> = (0..w.len()).filter(|&x| w[x] != 0).collect();
    let mut acc = vec![0u128; w.len()];
    for (i, &x) in support.iter().enumerate() {
        for &y in &support[i..] {
            let mut pxy = (w[x] as u128) * (w[y] as u128);
            if x != y {
                pxy *= 2;
            }
            for &z in &support {
                acc[m.med(x, y, z)] += pxy * (w[z] as u128);
            }
        }
    }
    let shift = 2 * DYADIC_BITS;
    let mask = (1u128 << shift) - 1;
    let quotients: Vec<u64> = acc.iter().map(|&a| (a >> shift) as u64).collect();
    let remainders: Vec<u128> = acc.iter().map(|&a| a & mask).collect();
    apportion(quotients, &remainders, DYADIC_ONE)
}

fn dyadic_measure(w: &[u64]) -> Measure {
    let denom = BigInt::from(DYADIC_ONE);
    Measure {
        weights: w
            .iter()
            .map(|&x| BigRational::new(BigInt::from(x), denom.clone()))
            .collect(),
    }
}

/// One iteration run of the fixed-point search.
#[derive(Clone, Debug)]
pub struct PhiRun {
    pub terminal: Measure,
    pub iterations: usize,
    /// The step size reached exactly zero before the iteration budget ran out.
    pub converged: bool,
    /// Total-variation distance between the last two iterates.
    pub final_step: BigRational,
    /// Index into the cubical list of the nearest cubical measure.
    pub nearest: usize,
    pub distance: BigRational,
    pub within_tol: bool,
}

#[derive(Clone, Debug)]
pub struct PhiSearchReport {
    pub cubes: Vec<Cube>,
    pub cubical: Vec<Measure>,
    pub runs: Vec<PhiRun>,
}

/// Iterates the self-median operator from pseudo-random starting measures
/// and reports where each run lands relative to the cubical measures.
///
/// Starting weights are random integers in 1..=1000, scaled onto the dyadic
/// grid. Every cubical measure is first verified to be an exact fixed point.
/// A run stops early only when a step moves no mass at all.
pub fn find_phi_fixed_points(
    m: &MedianAlgebra,
    starts: usize,
    iters: usize,
    tol: &BigRational,
    seed: u64,
) -> Result<PhiSearchReport> {
    let cubes = cubes::enumerate(m)?;
    let cubical: Vec<Measure> = cubes.iter().map(|c| cubical_measure(m, c)).collect();
    for (cube, lambda) in cubes.iter().zip(&cubical) {
        if phi(m, lambda) != *lambda {
            return Err(Error::InternalInconsistency {
                context: format!(
                    "cubical measure on {:?} is not fixed by the self-median operator",
                    cube.set()
                ),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runs = Vec::with_capacity(starts);
    for _ in 0..starts {
        let raw: Vec<u64> = (0..m.n()).map(|_| rng.gen_range(1..=1000)).collect();
        let mut w = normalize_to_dyadic(&raw);
        let mut iterations = 0;
        let mut converged = false;
        let mut step_l1: u64 = 0;
        for _ in 0..iters {
            let next = dyadic_phi_step(m, &w);
            iterations += 1;
            step_l1 = w
                .iter()
                .zip(&next)
                .map(|(&a, &b)| a.abs_diff(b))
                .sum();
            w = next;
            if step_l1 == 0 {
                converged = true;
                break;
            }
        }
        let terminal = dyadic_measure(&w);
        let final_step = BigRational::new(
            BigInt::from(step_l1),
            BigInt::from(1u64 << (DYADIC_BITS + 1)),
        );
        let mut nearest = 0;
        let mut distance = terminal.tv_distance(&cubical[0]);
        for (i, lambda) in cubical.iter().enumerate().skip(1) {
            let d = terminal.tv_distance(lambda);
            if d < distance {
                nearest = i;
                distance = d;
            }
        }
        let within_tol = distance <= *tol;
        runs.push(PhiRun {
            terminal,
            iterations,
            converged,
            final_step,
            nearest,
            distance,
            within_tol,
        });
    }
    Ok(PhiSearchReport {
        cubes,
        cubical,
        runs,
    })
}

/// Mass of one intersection of oriented wall sides.
#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    /// Indices into the wall list passed to `halfspace_mass`.
    pub family: Vec<usize>,
    /// Per wall: true picks the canonical side, false its complement.
    pub orientations: Vec<bool>,
    pub mass: BigRational,
    /// The mass is 2^{-exponent}; absent when the mass is zero.
    pub exponent: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub entries: Vec<SpectrumEntry>,
}

/// Masses of all intersections of up to `max_family` oriented wall sides
/// under a balanced measure. Each mass must be zero or 2^{-s} with s at most
/// the family size; anything else is a `SpectrumViolation`.
pub fn halfspace_mass(
    m: &MedianAlgebra,
    eta: &Measure,
    walls: &[Wall],
    max_family: usize,
) -> Result<SpectrumReport> {
    let image = phi(m, eta);
    if image != *eta {
        let witness = (0..eta.n())
            .find(|&x| image.weights[x] != eta.weights[x])
            .unwrap_or(0);
        return Err(Error::NotBalanced { witness });
    }

    let mut entries = Vec::new();
    let mut family = Vec::new();
    collect_spectrum(m, eta, walls, max_family, 0, &mut family, &mut entries)?;
    Ok(SpectrumReport { entries })
}

fn collect_spectrum(
    m: &MedianAlgebra,
    eta: &Measure,
    walls: &[Wall],
    max_family: usize,
    next: usize,
    family: &mut Vec<usize>,
    entries: &mut Vec<SpectrumEntry>,
) -> Result<()> {
    if !family.is_empty() {
        for bits in 0..1u32 << family.len() {
            let orientations: Vec<bool> =
                (0..family.len()).map(|i| bits >> i & 1 == 1).collect();
            let mut cut = PointSet::full(m.n());
            for (&w, &canonical) in family.iter().zip(&orientations) {
                let side = if canonical {
                    walls[w].side().clone()
                } else {
                    walls[w].coside()
                };
                cut = cut.intersection(&side);
            }
            let mass = eta.mass(&cut);
            let exponent = dyadic_exponent(&mass, family.len()).ok_or_else(|| {
                Error::SpectrumViolation {
                    family: family.clone(),
                    family_size: family.len(),
                    mass: mass.to_string(),
                }
            })?;
            entries.push(SpectrumEntry {
                family: family.clone(),
                orientations,
                mass,
                exponent,
            });
        }
    }
    if family.len() == max_family {
        return Ok(());
    }
    for w in next..walls.len() {
        family.push(w);
        collect_spectrum(m, eta, walls, max_family, w + 1, family, entries)?;
        family.pop();
    }
    Ok(())
}

/// `Some(None)` for zero mass, `Some(Some(s))` when mass = 2^{-s} with
/// s <= bound, `None` otherwise.
#[allow(clippy::option_option)]
fn dyadic_exponent(mass: &BigRational, bound: usize) -> Option<Option<u32>> {
    if mass.is_zero() {
        return Some(None);
    }
    if !mass.numer().is_one() {
        return None;
    }
    let mut denom = mass.denom().clone();
    let mut s = 0u32;
    while denom.is_even() {
        denom /= 2;
        s += 1;
    }
    if denom.is_one() && s as usize <= bound {
        Some(Some(s))
    } else {
        None
    }
}

/// A step distribution on the acting group, given by words in the action's
/// generators with exact rational weights.
#[derive(Clone, Debug)]
pub struct GroupMeasure {
    entries: Vec<(String, Permutation, BigRational)>,
    generating: bool,
}

impl GroupMeasure {
    pub fn entries(&self) -> &[(String, Permutation, BigRational)] {
        &self.entries
    }

    /// The support generates the whole acting group.
    pub fn is_generating(&self) -> bool {
        self.generating
    }
}

/// Resolves each word against the action and validates the weights. The
/// generating flag compares the semigroup closure of the support with the
/// full group.
pub fn group_measure(
    action: &GroupAction,
    weights: &[(String, BigRational)],
) -> Result<GroupMeasure> {
    if weights.is_empty() {
        return Err(Error::InvalidMeasure {
            reason: "no words in the step distribution".into(),
        });
    }
    let mut entries = Vec::with_capacity(weights.len());
    let mut total = BigRational::zero();
    for (word, weight) in weights {
        if weight.is_negative() {
            return Err(Error::InvalidMeasure {
                reason: format!("negative weight on word \"{word}\""),
            });
        }
        let perm = action.parse_word(word)?;
        total += weight;
        entries.push((word.clone(), perm, weight.clone()));
    }
    if !total.is_one() {
        return Err(Error::InvalidMeasure {
            reason: format!("total mass is {total}, not 1"),
        });
    }

    let support: Vec<Permutation> = entries
        .iter()
        .filter(|(_, _, w)| !w.is_zero())
        .map(|(_, g, _)| g.clone())
        .collect();
    let group: BTreeSet<Permutation> = action
        .group_elements(GROUP_CLOSURE_CAP)?
        .into_iter()
        .collect();
    let closure = semigroup_closure(&support, GROUP_CLOSURE_CAP)?;
    let generating = closure == group;
    Ok(GroupMeasure {
        entries,
        generating,
    })
}

/// Closure of a set of permutations under composition. In a finite group
/// this contains the identity and inverses of every member.
fn semigroup_closure(seed: &[Permutation], cap: usize) -> Result<BTreeSet<Permutation>> {
    let mut seen: BTreeSet<Permutation> = seed.iter().cloned().collect();
    let mut queue: VecDeque<Permutation> = seen.iter().cloned().collect();
    while let Some(g) = queue.pop_front() {
        for s in seed {
            let h = s.compose(&g);
            if seen.insert(h.clone()) {
                if seen.len() > cap {
                    return Err(Error::TooLarge {
                        what: "semigroup closure",
                        limit: cap,
                        actual: seen.len(),
                    });
                }
                queue.push_back(h);
            }
        }
    }
    Ok(seen)
}

/// Convolution mu * nu: push nu forward by each group element and average
/// with the step weights.
pub fn convolve(action: &GroupAction, mu: &GroupMeasure, nu: &Measure) -> Measure {
    assert_eq!(
        nu.n(),
        action.algebra().n(),
        "measure carrier does not match the action"
    );
    let mut weights = vec![BigRational::zero(); nu.n()];
    for (_, g, w) in &mu.entries {
        if w.is_zero() {
            continue;
        }
        for x in 0..nu.n() {
            let v = &nu.weights[x];
            if v.is_zero() {
                continue;
            }
            weights[g.apply(x)] += w * v;
        }
    }
    Measure { weights }
}

/// Vertices of the stationary polytope, one per closed class.
#[derive(Clone, Debug)]
pub struct StationaryReport {
    /// Closed classes of the step chain, ordered by smallest member. With a
    /// generating step distribution these are exactly the orbits.
    pub classes: Vec<PointSet>,
    /// The unique stationary measure supported on each class.
    pub vertices: Vec<Measure>,
}

/// Computes the vertices of {nu : mu * nu = nu} within the simplex, exactly:
/// one stationary measure per closed class, found by solving the rational
/// linear system on that class. The null-space dimension of the full
/// transition matrix minus the identity must equal the class count, and each
/// vertex is re-checked against the convolution.
pub fn stationary_polytope(
    action: &GroupAction,
    mu: &GroupMeasure,
) -> Result<StationaryReport> {
    if !mu.is_generating() {
        return Err(Error::NotGenerating);
    }
    let n = action.algebra().n();
    let support: Vec<&Permutation> = mu
        .entries
        .iter()
        .filter(|(_, _, w)| !w.is_zero())
        .map(|(_, g, _)| g)
        .collect();

    let mut classes: Vec<PointSet> = Vec::new();
    let mut assigned = vec![false; n];
    for start in 0..n {
        if assigned[start] {
            continue;
        }
        let mut class = PointSet::singleton(n, start);
        let mut queue = VecDeque::from([start]);
        assigned[start] = true;
        while let Some(x) = queue.pop_front() {
            for g in &support {
                let y = g.apply(x);
                if !assigned[y] {
                    assigned[y] = true;
                    class.insert(y);
                    queue.push_back(y);
                }
            }
        }
        classes.push(class);
    }

    // Transition matrix of the step chain: from x, move to g(x) with the
    // weight of g.
    let mut p = vec![vec![BigRational::zero(); n]; n];
    for (_, g, w) in &mu.entries {
        if w.is_zero() {
            continue;
        }
        for x in 0..n {
            p[x][g.apply(x)] += w;
        }
    }

    let mut vertices = Vec::with_capacity(classes.len());
    for class in &classes {
        let idx: Vec<usize> = class.iter().collect();
        let k = idx.len();
        // Balance equations (P^T - I) pi = 0 plus normalization.
        let mut rows = Vec::with_capacity(k + 1);
        let mut rhs = Vec::with_capacity(k + 1);
        for (j, &y) in idx.iter().enumerate() {
            let mut row = vec![BigRational::zero(); k];
            for (i, &x) in idx.iter().enumerate() {
                row[i] = p[x][y].clone();
            }
            row[j] -= BigRational::one();
            rows.push(row);
            rhs.push(BigRational::zero());
        }
        rows.push(vec![BigRational::one(); k]);
        rhs.push(BigRational::one());

        let pi = solve_unique(rows, rhs).map_err(|_| Error::InternalInconsistency {
            context: format!("stationary system on class {class:?} has no unique solution"),
        })?;
        if pi.iter().any(|w| w.is_negative()) {
            return Err(Error::InternalInconsistency {
                context: format!("stationary solution on class {class:?} has negative mass"),
            });
        }
        let mut weights = vec![BigRational::zero(); n];
        for (j, &x) in idx.iter().enumerate() {
            weights[x] = pi[j].clone();
        }
        let vertex = Measure::new(weights).map_err(|e| Error::InternalInconsistency {
            context: format!("stationary solution on class {class:?} is not a measure: {e}"),
        })?;
        if convolve(action, mu, &vertex) != vertex {
            return Err(Error::InternalInconsistency {
                context: format!("stationary solution on class {class:?} fails re-substitution"),
            });
        }
        vertices.push(vertex);
    }

    // Dimension cross-check: the fixed space of the transition operator has
    // one degree of freedom per closed class.
    let mut full = vec![vec![BigRational::zero(); n]; n];
    for (i, row) in full.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = p[j][i].clone();
            if i == j {
                *cell -= BigRational::one();
            }
        }
    }
    let nullity = n - matrix_rank(full);
    if nullity != classes.len() {
        return Err(Error::InternalInconsistency {
            context: format!(
                "fixed space has dimension {nullity} but there are {} closed classes",
                classes.len()
            ),
        });
    }

    Ok(StationaryReport { classes, vertices })
}

/// Gaussian elimination over the rationals; errors unless the system has
/// exactly one solution.
fn solve_unique(
    mut rows: Vec<Vec<BigRational>>,
    mut rhs: Vec<BigRational>,
) -> Result<Vec<BigRational>> {
    let unknowns = rows.first().map_or(0, Vec::len);
    let mut pivot_rows = Vec::with_capacity(unknowns);
    let mut used = vec![false; rows.len()];
    for col in 0..unknowns {
        let Some(r) = (0..rows.len()).find(|&r| !used[r] && !rows[r][col].is_zero()) else {
            return Err(Error::NoWitness);
        };
        used[r] = true;
        pivot_rows.push((col, r));
        let scale = rows[r][col].clone();
        for c in col..unknowns {
            rows[r][c] = &rows[r][c] / &scale;
        }
        rhs[r] = &rhs[r] / &scale;
        for other in 0..rows.len() {
            if other == r || rows[other][col].is_zero() {
                continue;
            }
            let factor = rows[other][col].clone();
            for c in col..unknowns {
                let delta = &factor * &rows[r][c];
                rows[other][c] -= delta;
            }
            let delta = &factor * &rhs[r];
            rhs[other] -= delta;
        }
    }
    // Rows left over must have reduced to 0 = 0.
    for r in 0..rows.len() {
        if !used[r] && !rhs[r].is_zero() {
            return Err(Error::NoWitness);
        }
    }
    let mut solution = vec![BigRational::zero(); unknowns];
    for (col, r) in pivot_rows {
        solution[col] = rhs[r].clone();
    }
    Ok(solution)
}

fn matrix_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(r) = (row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(row, r);
        let scale = rows[row][col].clone();
        for c in col..cols {
            rows[row][c] = &rows[row][c] / &scale;
        }
        for other in 0..rows.len() {
            if other == row || rows[other][col].is_zero() {
                continue;
            }
            let factor = rows[other][col].clone();
            for c in col..cols {
                let delta = &factor * &rows[row][c];
                rows[other][c] -= delta;
            }
        }
        rank += 1;
        row += 1;
        if row == rows.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::validate_action;
    use crate::set::PointSet;
    use std::sync::Arc;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    fn measure(weights: &[(i64, i64)]) -> Measure {
        Measure::new(weights.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    /// Reference implementation: sum over all ordered triples.
    fn phi_by_ordered_triples(m: &MedianAlgebra, eta: &Measure) -> Measure {
        let mut out = vec![BigRational::zero(); m.n()];
        for x in 0..m.n() {
            for y in 0..m.n() {
                for z in 0..m.n() {
                    out[m.med(x, y, z)] +=
                        eta.weight(x) * eta.weight(y) * eta.weight(z);
                }
            }
        }
        Measure::new(out).unwrap()
    }

    #[test]
    fn validation_rejects_bad_weight_vectors() {
        let negative = Measure::new(vec![ratio(3, 2), ratio(-1, 2)]);
        assert!(matches!(negative, Err(Error::InvalidMeasure { .. })));
        let short = Measure::new(vec![ratio(1, 2), ratio(1, 4)]);
        assert!(matches!(short, Err(Error::InvalidMeasure { .. })));
    }

    #[test]
    fn phi_matches_the_ordered_triple_oracle_on_p3() {
        let m = MedianAlgebra::path(3).unwrap();
        let eta = measure(&[(1, 4), (1, 4), (1, 2)]);
        let image = phi(&m, &eta);
        assert_eq!(image, phi_by_ordered_triples(&m, &eta));
        assert_eq!(image, measure(&[(5, 32), (11, 32), (1, 2)]));
    }

    #[test]
    fn dirac_measures_are_fixed() {
        let m = MedianAlgebra::path(3).unwrap();
        for x in 0..3 {
            let delta = Measure::dirac(3, x);
            assert_eq!(phi(&m, &delta), delta);
        }
    }

    #[test]
    fn edge_and_square_measures_are_fixed() {
        let m = MedianAlgebra::hypercube(2).unwrap();
        let uniform = Measure::uniform(4);
        assert_eq!(phi(&m, &uniform), uniform);
        // Uniform on the edge fixing the first coordinate.
        let edge = measure(&[(1, 2), (1, 2), (0, 1), (0, 1)]);
        assert_eq!(phi(&m, &edge), edge);
    }

    #[test]
    fn every_cubical_measure_on_the_three_cube_is_fixed() {
        let m = MedianAlgebra::hypercube(3).unwrap();
        let all = cubical_measures(&m).unwrap();
        assert_eq!(all.len(), 49);
        for (cube, lambda) in &all {
            assert_eq!(
                phi(&m, lambda),
                *lambda,
                "cube {:?} has a drifting measure",
                cube.set()
            );
            assert_eq!(lambda.support(), *cube.set());
        }
    }

    #[test]
    fn uniform_on_a_non_cube_support_moves() {
        let m = MedianAlgebra::path(3).unwrap();
        let eta = Measure::uniform(3);
        let image = phi(&m, &eta);
        assert_ne!(image, eta);
        assert_eq!(image, measure(&[(7, 27), (13, 27), (7, 27)]));
    }

    #[test]
    fn fixed_uniform_measures_sit_exactly_on_cubes() {
        for m in [
            MedianAlgebra::path(3).unwrap(),
            MedianAlgebra::hypercube(2).unwrap(),
        ] {
            for mask in 1..1u32 << m.n() {
                let s = PointSet::from_mask(m.n(), mask);
                if m.med_closure(&s) != s {
                    continue;
                }
                let eta = Measure::uniform_on(m.n(), &s);
                let fixed = phi(&m, &eta) == eta;
                assert_eq!(
                    fixed,
                    cubes::is_cube(&m, &s),
                    "support {s:?} disagrees with the cube test"
                );
            }
        }
    }

    #[test]
    fn random_starts_converge_to_cubical_measures_on_p3() {
        let m = MedianAlgebra::path(3).unwrap();
        let tol = ratio(1, 1_000_000);
        let report = find_phi_fixed_points(&m, 40, 300, &tol, 7).unwrap();
        assert_eq!(report.cubes.len(), 6);
        assert_eq!(report.runs.len(), 40);
        for run in &report.runs {
            assert!(
                run.within_tol,
                "terminal {:?} is {} away from the nearest cubical measure",
                run.terminal, run.distance
            );
        }
    }

    #[test]
    fn a_dyadic_edge_measure_is_a_fixed_point_of_the_engine() {
        let m = MedianAlgebra::hypercube(2).unwrap();
        let half = 1u64 << (DYADIC_BITS - 1);
        let w = vec![half, half, 0, 0];
        assert_eq!(dyadic_phi_step(&m, &w), w);
    }

    #[test]
    fn rounding_preserves_the_total_and_breaks_ties_low() {
        let out = apportion(vec![0, 0, 0], &[5, 5, 2], 2);
        assert_eq!(out, vec![1, 1, 0]);
        assert_eq!(normalize_to_dyadic(&[1, 1]).iter().sum::<u64>(), DYADIC_ONE);
    }

    #[test]
    fn spectrum_of_the_endpoint_pair_measure_on_p3() {
        let m = MedianAlgebra::path(3).unwrap();
        let eta = measure(&[(1, 2), (0, 1), (1, 2)]);
        let walls = m.walls().unwrap().to_vec();
        let report = halfspace_mass(&m, &eta, &walls, 3).unwrap();
        let entry = |family: &[usize], orient: &[bool]| {
            report
                .entries
                .iter()
                .find(|e| e.family == family && e.orientations == orient)
                .expect("entry missing")
                .clone()
        };
        // Walls of P3 in order: side {0}, then side {0,1}.
        let near = entry(&[0], &[true]);
        assert_eq!(near.mass, ratio(1, 2));
        assert_eq!(near.exponent, Some(1));
        let both = entry(&[0, 1], &[true, true]);
        assert_eq!(both.mass, ratio(1, 2));
        let mixed = entry(&[0, 1], &[false, true]);
        assert!(mixed.mass.is_zero());
        assert_eq!(mixed.exponent, None);
    }

    #[test]
    fn spectrum_rejects_an_unbalanced_measure() {
        let m = MedianAlgebra::path(3).unwrap();
        let eta = measure(&[(1, 4), (1, 4), (1, 2)]);
        let walls = m.walls().unwrap().to_vec();
        let err = halfspace_mass(&m, &eta, &walls, 2).unwrap_err();
        assert!(matches!(err, Error::NotBalanced { witness: 0 }));
    }

    fn swap_action() -> GroupAction {
        let m = Arc::new(MedianAlgebra::hypercube(1).unwrap());
        validate_action(m, &[("s".into(), vec![1, 0])]).unwrap()
    }

    #[test]
    fn convolution_by_a_swap_moves_mass() {
        let action = swap_action();
        let mu = group_measure(&action, &[("s".into(), ratio(1, 1))]).unwrap();
        assert!(mu.is_generating());
        let nu = measure(&[(1, 3), (2, 3)]);
        let image = convolve(&action, &mu, &nu);
        assert_eq!(image, measure(&[(2, 3), (1, 3)]));
        // Support of the convolution is the union of the translated supports.
        assert_eq!(image.support(), PointSet::full(2));
    }

    #[test]
    fn the_identity_word_alone_does_not_generate() {
        let action = swap_action();
        let mu = group_measure(&action, &[("".into(), ratio(1, 1))]).unwrap();
        assert!(!mu.is_generating());
        let nu = measure(&[(1, 3), (2, 3)]);
        assert_eq!(convolve(&action, &mu, &nu), nu);
        let err = stationary_polytope(&action, &mu).unwrap_err();
        assert!(matches!(err, Error::NotGenerating));
    }

    /// Sign changes of the three-cube with an even number of flipped
    /// coordinates: generated by xor with 101 and xor with 110.
    fn parity_action() -> GroupAction {
        let m = Arc::new(MedianAlgebra::hypercube(3).unwrap());
        let xor = |k: usize| (0..8).map(|x| x ^ k).collect::<Vec<_>>();
        validate_action(m, &[("u".into(), xor(5)), ("v".into(), xor(6))]).unwrap()
    }

    #[test]
    fn parity_action_has_two_stationary_vertices() {
        let action = parity_action();
        let mu = group_measure(
            &action,
            &[("u".into(), ratio(1, 2)), ("v".into(), ratio(1, 2))],
        )
        .unwrap();
        assert!(mu.is_generating());
        let report = stationary_polytope(&action, &mu).unwrap();
        assert_eq!(report.classes.len(), 2);
        assert_eq!(report.classes[0], PointSet::from_indices(8, [0, 3, 5, 6]));
        assert_eq!(report.classes[1], PointSet::from_indices(8, [1, 2, 4, 7]));
        for (class, vertex) in report.classes.iter().zip(&report.vertices) {
            assert_eq!(*vertex, Measure::uniform_on(8, class));
            assert_eq!(convolve(&action, &mu, vertex), *vertex);
        }
        // Every mixture of the vertices is invariant as well.
        for t in [ratio(0, 1), ratio(1, 4), ratio(1, 2), ratio(1, 1)] {
            let weights: Vec<BigRational> = (0..8)
                .map(|x| {
                    &t * report.vertices[0].weight(x)
                        + (BigRational::one() - &t) * report.vertices[1].weight(x)
                })
                .collect();
            let eta = Measure::new(weights).unwrap();
            assert_eq!(convolve(&action, &mu, &eta), eta);
        }
    }

    #[test]
    fn a_transitive_rotation_has_the_uniform_measure_as_sole_vertex() {
        let m = Arc::new(MedianAlgebra::hypercube(2).unwrap());
        let action = validate_action(m, &[("r".into(), vec![1, 3, 0, 2])]).unwrap();
        let mu = group_measure(&action, &[("r".into(), ratio(1, 1))]).unwrap();
        let report = stationary_polytope(&action, &mu).unwrap();
        assert_eq!(report.classes.len(), 1);
        assert_eq!(report.vertices, vec![Measure::uniform(4)]);
    }

    #[test]
    fn a_trivial_action_leaves_every_dirac_measure_stationary() {
        let m = Arc::new(MedianAlgebra::path(3).unwrap());
        let action = validate_action(m, &[]).unwrap();
        let mu = group_measure(&action, &[("".into(), ratio(1, 1))]).unwrap();
        assert!(mu.is_generating());
        let report = stationary_polytope(&action, &mu).unwrap();
        assert_eq!(report.classes.len(), 3);
        for (x, vertex) in report.vertices.iter().enumerate() {
            assert_eq!(*vertex, Measure::dirac(3, x));
        }
    }

    #[test]
    fn phi_commutes_with_pushforward_by_an_automorphism() {
        let m = MedianAlgebra::hypercube(2).unwrap();
        let g = Permutation::from_map(&[1, 3, 0, 2]).unwrap();
        let eta = measure(&[(1, 10), (2, 10), (3, 10), (4, 10)]);
        assert_eq!(phi(&m, &pushforward(&g, &eta)), pushforward(&g, &phi(&m, &eta)));
    }
}
