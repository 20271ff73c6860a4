//! Random walks on the group F2 x Z/2 in reduced-word form, together with
//! finite tree models of the boundary they head towards.
//!
//! A trajectory multiplies a fresh generator on the right at every step.
//! The F2 part is kept as a reduced word; the Z/2 part is a sign that each
//! step either keeps or flips. The boundary proxy is the length-`depth`
//! prefix of the reduced word at a late step, read off per trajectory and
//! aggregated into a cylinder histogram.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::MedianAlgebra;
use crate::error::{Error, Result};

/// Letters of F2 in sampling order; xor 1 inverts a letter.
pub const LETTERS: [&str; 4] = ["a", "a'", "b", "b'"];

/// Longest trailing constant-sign run that the report tracks.
pub const MAX_FLIP_RUN: usize = 8;

/// Master seed used when a caller has no preference.
pub const DEFAULT_SEED: u64 = 0x6d65_646c_6162;

/// A trajectory whose reduced word stays shorter than the prefix depth is
/// extended in blocks of `steps` until it resolves or this many blocks pass.
const EXTENSION_CAP: usize = 100;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Debug)]
pub struct WalkConfig {
    /// Boundary truncation radius: the length of the reported prefix.
    pub depth: usize,
    /// Steps per trajectory before the prefix and sign are read off.
    pub steps: usize,
    pub trajectories: usize,
    pub seed: u64,
    /// Eight weights in letter-major order:
    /// (a,+), (a,-), (a',+), (a',-), (b,+), (b,-), (b',+), (b',-).
    pub step_weights: Vec<BigRational>,
}

impl WalkConfig {
    /// Uniform step distribution: every (letter, sign) pair at 1/8.
    pub fn uniform(depth: usize, steps: usize, trajectories: usize, seed: u64) -> Self {
        let eighth = BigRational::new(BigInt::one(), BigInt::from(8));
        WalkConfig {
            depth,
            steps,
            trajectories,
            seed,
            step_weights: vec![eighth; 8],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::BadWalkConfig {
                reason: "depth must be at least 1".into(),
            });
        }
        if self.steps <= self.depth {
            return Err(Error::BadWalkConfig {
                reason: format!(
                    "steps ({}) must exceed the depth ({})",
                    self.steps, self.depth
                ),
            });
        }
        if self.step_weights.len() != 8 {
            return Err(Error::BadWalkConfig {
                reason: format!("expected 8 step weights, got {}", self.step_weights.len()),
            });
        }
        if let Some(i) = self.step_weights.iter().position(|w| w.is_negative()) {
            return Err(Error::BadWalkConfig {
                reason: format!("negative weight for step {i}"),
            });
        }
        let total = self
            .step_weights
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + w);
        if !total.is_one() {
            return Err(Error::BadWalkConfig {
                reason: format!("step weights sum to {total}, not 1"),
            });
        }
        StepSampler::build(&self.step_weights).map(|_| ())
    }

    /// Probability that a step keeps the sign.
    fn sign_keep_probability(&self) -> BigRational {
        self.step_weights
            .iter()
            .step_by(2)
            .fold(BigRational::zero(), |acc, w| acc + w)
    }

    /// Marginal probability of each letter.
    fn letter_marginals(&self) -> [BigRational; 4] {
        let mut out = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        for (i, w) in self.step_weights.iter().enumerate() {
            out[i / 2] += w;
        }
        out
    }
}

/// Aggregated statistics over all trajectories of one simulation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkReport {
    pub depth: usize,
    pub steps: usize,
    pub trajectories: usize,
    /// Counts per length-`depth` cylinder; 4 * 3^(depth-1) cells.
    pub prefix_counts: Vec<u64>,
    /// Trajectories whose word stayed too short through every extension.
    pub unresolved: u64,
    /// Sign histogram at step `steps`: (plus, minus).
    pub sign_counts: (u64, u64),
    /// For k = 1..=MAX_FLIP_RUN: trajectories whose sign was constant over
    /// the final k steps.
    pub flip_counts: [u64; MAX_FLIP_RUN],
}

impl WalkReport {
    pub fn resolved(&self) -> u64 {
        self.trajectories as u64 - self.unresolved
    }

    /// Empirical cylinder distribution over the resolved trajectories.
    pub fn cylinder_distribution(&self) -> Vec<f64> {
        let resolved = self.resolved();
        if resolved == 0 {
            return vec![0.0; self.prefix_counts.len()];
        }
        self.prefix_counts
            .iter()
            .map(|&c| c as f64 / resolved as f64)
            .collect()
    }

    pub fn sign_plus_fraction(&self) -> f64 {
        self.sign_counts.0 as f64 / self.trajectories as f64
    }

    /// Fraction of trajectories with constant sign over the final k steps,
    /// for k = 1..=MAX_FLIP_RUN.
    pub fn sign_flip_stats(&self) -> [f64; MAX_FLIP_RUN] {
        let mut out = [0.0; MAX_FLIP_RUN];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.flip_counts[k] as f64 / self.trajectories as f64;
        }
        out
    }

    /// Total-variation distance between the resolved cylinder histogram and
    /// a flat per-cell prediction.
    pub fn cylinder_tv(&self, per_cell: &BigRational) -> f64 {
        let p = per_cell.to_f64().unwrap_or(0.0);
        0.5 * self
            .cylinder_distribution()
            .iter()
            .map(|q| (q - p).abs())
            .sum::<f64>()
    }
}

/// Exact reference values the histograms should approach.
#[derive(Clone, Debug)]
pub struct WalkPredictions {
    /// Per-cell cylinder mass. Present only when the letter marginals are
    /// uniform; the harmonic measure of the simple walk is flat on cylinders.
    pub cylinder: Option<BigRational>,
    /// Probability that the sign is + at step `steps`.
    pub sign_plus: f64,
    /// Probability of a constant sign over the final k steps, k = 1..=8.
    pub flip_runs: [f64; MAX_FLIP_RUN],
}

pub fn cylinder_cells(depth: usize) -> usize {
    assert!(depth >= 1, "cylinders need depth at least 1");
    4 * 3usize.pow(depth as u32 - 1)
}

/// Mass of each length-`depth` cylinder under the simple walk's harmonic
/// measure: (1/4) (1/3)^(depth-1).
pub fn uniform_cylinder_probability(depth: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(cylinder_cells(depth)))
}

pub fn predictions(config: &WalkConfig) -> WalkPredictions {
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    let uniform_letters = config
        .letter_marginals()
        .iter()
        .all(|m| *m == quarter);
    let cylinder = uniform_letters.then(|| uniform_cylinder_probability(config.depth));

    let keep = config.sign_keep_probability().to_f64().unwrap_or(0.0);
    // The sign after n steps is a product of n independent +-1 increments,
    // so its bias is the n-th power of the step bias.
    let bias = 2.0 * keep - 1.0;
    let sign_plus = (1.0 + bias.powi(config.steps as i32)) / 2.0;
    let mut flip_runs = [0.0; MAX_FLIP_RUN];
    for (k, slot) in flip_runs.iter_mut().enumerate() {
        *slot = keep.powi(k as i32 + 1);
    }
    WalkPredictions {
        cylinder,
        sign_plus,
        flip_runs,
    }
}

/// Threshold sampler over the eight (letter, sign) steps, exact: weights are
/// brought over a common denominator and compared as integers.
struct StepSampler {
    cum: [u128; 8],
    total: u128,
}

impl StepSampler {
    fn build(weights: &[BigRational]) -> Result<StepSampler> {
        let mut denom = BigInt::one();
        for w in weights {
            denom = denom.lcm(w.denom());
        }
        let mut cum = [0u128; 8];
        let mut acc = BigInt::from(0);
        for (slot, w) in cum.iter_mut().zip(weights) {
            acc += w.numer() * (&denom / w.denom());
            *slot = acc.to_u128().ok_or_else(|| Error::BadWalkConfig {
                reason: "step weight denominators are too large to sample exactly".into(),
            })?;
        }
        let total = denom.to_u128().ok_or_else(|| Error::BadWalkConfig {
            reason: "step weight denominators are too large to sample exactly".into(),
        })?;
        Ok(StepSampler { cum, total })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let r = rng.gen_range(0..self.total);
        self.cum
            .iter()
            .position(|&c| r < c)
            .expect("thresholds cover the sampling range")
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(GOLDEN);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn push_reduced(word: &mut Vec<u8>, letter: u8) {
    if word.last() == Some(&(letter ^ 1)) {
        word.pop();
    } else {
        word.push(letter);
    }
}

/// Cell index of a reduced prefix: the first letter picks one of 4 branches,
/// every later letter one of the 3 allowed by reduction, ranked in letter
/// order. Lexicographic in the word.
fn cylinder_index(prefix: &[u8]) -> usize {
    let mut idx = prefix[0] as usize;
    for w in prefix.windows(2) {
        let banned = w[0] ^ 1;
        let rank = (0..4u8)
            .filter(|&l| l != banned)
            .position(|l| l == w[1])
            .expect("prefix is a reduced word");
        idx = idx * 3 + rank;
    }
    idx
}

/// Runs the configured number of independent trajectories and aggregates
/// their statistics. Bit-reproducible: each trajectory derives its own seed
/// from the master seed, so aggregation order does not matter.
pub fn simulate_walk(config: &WalkConfig) -> WalkReport {
    simulate_with_cap(config, EXTENSION_CAP)
}

fn simulate_with_cap(config: &WalkConfig, cap: usize) -> WalkReport {
    config.validate().expect("invalid walk configuration");
    let sampler = StepSampler::build(&config.step_weights).expect("validated above");

    let mut report = WalkReport {
        depth: config.depth,
        steps: config.steps,
        trajectories: config.trajectories,
        prefix_counts: vec![0; cylinder_cells(config.depth)],
        unresolved: 0,
        sign_counts: (0, 0),
        flip_counts: [0; MAX_FLIP_RUN],
    };

    for i in 0..config.trajectories {
        let seed = splitmix64(config.seed.wrapping_add((i as u64).wrapping_mul(GOLDEN)));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut word: Vec<u8> = Vec::with_capacity(config.steps);
        let mut sign_plus = true;
        let mut last_flip = 0usize;
        for t in 1..=config.steps {
            let step = sampler.sample(&mut rng);
            if step % 2 == 1 {
                sign_plus = !sign_plus;
                last_flip = t;
            }
            push_reduced(&mut word, (step / 2) as u8);
        }
        // Sign statistics are read at step `steps`; extensions below only
        // resolve the prefix.
        if sign_plus {
            report.sign_counts.0 += 1;
        } else {
            report.sign_counts.1 += 1;
        }
        let trailing = config.steps - last_flip;
        for k in 1..=MAX_FLIP_RUN {
            if trailing >= k {
                report.flip_counts[k - 1] += 1;
            }
        }

        let mut blocks = 0;
        while word.len() < config.depth && blocks < cap {
            for _ in 0..config.steps {
                let step = sampler.sample(&mut rng);
                push_reduced(&mut word, (step / 2) as u8);
            }
            blocks += 1;
        }
        if word.len() >= config.depth {
            report.prefix_counts[cylinder_index(&word[..config.depth])] += 1;
        } else {
            report.unresolved += 1;
        }
    }
    report
}

/// Median algebra of the radius-`depth` ball in the 4-regular tree, with an
/// optional extra sign coordinate. Vertices are reduced words in
/// breadth-first order, root first; with the sign, point index 2t+s pairs
/// tree vertex t with sign s.
pub fn tree_model(depth: usize, with_sign: bool) -> Result<MedianAlgebra> {
    const DEPTH_LIMIT: usize = 5;
    if depth > DEPTH_LIMIT {
        return Err(Error::TooLarge {
            what: "tree model depth",
            limit: DEPTH_LIMIT,
            actual: depth,
        });
    }
    let n = if depth == 0 {
        1
    } else {
        1 + 2 * (3usize.pow(depth as u32) - 1)
    };
    // One coordinate per edge: a vertex row marks the edges on its root path.
    let width = n - 1;
    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(n);
    rows.push(vec![b'0'; width]);
    let mut frontier: Vec<(usize, u8)> = Vec::new();
    if depth > 0 {
        for letter in 0..4u8 {
            let child = rows.len();
            let mut row = rows[0].clone();
            row[child - 1] = b'1';
            rows.push(row);
            frontier.push((child, letter));
        }
        for _ in 1..depth {
            let mut next = Vec::with_capacity(frontier.len() * 3);
            for &(node, last) in &frontier {
                for letter in (0..4u8).filter(|&l| l != (last ^ 1)) {
                    let child = rows.len();
                    let mut row = rows[node].clone();
                    row[child - 1] = b'1';
                    rows.push(row);
                    next.push((child, letter));
                }
            }
            frontier = next;
        }
    }
    debug_assert_eq!(rows.len(), n);
    let strings: Vec<String> = rows
        .into_iter()
        .map(|r| String::from_utf8(r).expect("rows are ASCII"))
        .collect();
    let tree = MedianAlgebra::from_embedding(&strings)?;
    if with_sign {
        MedianAlgebra::product(&tree, &MedianAlgebra::hypercube(1)?)
    } else {
        Ok(tree)
    }
}
