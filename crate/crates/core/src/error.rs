//! Error type shared across the crate.
//!
//! Variants split into two families: invalid input (bad tables, non-convex
//! sets, morphisms that are not morphisms) and internal inconsistencies that
//! signal a bug if they ever fire. `exit_code` reflects that split for the
//! command-line front end.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("median axiom {axiom} violated at witness {witness:?}")]
    AxiomViolation { axiom: u8, witness: Vec<usize> },

    #[error("embedded point set is not median closed: majority of points {x}, {y}, {z} is missing")]
    NotMedianClosed { x: usize, y: usize, z: usize },

    #[error("bad embedding: {reason}")]
    BadEmbedding { reason: String },

    #[error("bad median table: {reason}")]
    BadTable { reason: String },

    #[error("{what} of size {actual} exceeds the supported limit {limit}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        actual: usize,
    },

    #[error("set is not convex: {z} lies in the interval [{x}, {y}] but outside the set")]
    NotConvex { x: usize, y: usize, z: usize },

    #[error("set is not median closed: med({x}, {y}, {z}) = {m} lies outside the set")]
    NotSubalgebra {
        x: usize,
        y: usize,
        z: usize,
        m: usize,
    },

    #[error("set is not a cube: {reason}")]
    NotCube { reason: String },

    #[error("no gate separator point exists (this should be impossible)")]
    NoWitness,

    #[error("internal inconsistency: {context}")]
    InternalInconsistency { context: String },

    #[error("morphism does not factor through the cubical factor: {reason}")]
    NotFactorizable { reason: String },

    #[error("map is not a morphism: image of med({x}, {y}, {z}) disagrees at generator {generator:?}")]
    NotAutomorphism {
        generator: String,
        x: usize,
        y: usize,
        z: usize,
    },

    #[error("invalid permutation for generator {generator:?}: {reason}")]
    BadPermutation { generator: String, reason: String },

    #[error("decomposition is not equivariant under generator {generator:?}")]
    NotEquivariant { generator: String },

    #[error("support of the group measure does not generate the acting group")]
    NotGenerating,

    #[error("measure is invalid: {reason}")]
    InvalidMeasure { reason: String },

    #[error("walk configuration is invalid: {reason}")]
    BadWalkConfig { reason: String },

    #[error("measure is not balanced: mass at point {witness} changes under the self-median operator")]
    NotBalanced { witness: usize },

    #[error("half-space mass spectrum violated: sides {family:?} carry mass {mass}, not 0 or a dyadic 2^-s with s <= {family_size}")]
    SpectrumViolation {
        family: Vec<usize>,
        family_size: usize,
        mass: String,
    },

    #[error("oracle mismatch in {component}: {witness}")]
    Mismatch {
        component: &'static str,
        witness: String,
    },

    #[error("file format error: {reason}")]
    FileFormat { reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 1 for invalid input, 2 for conditions that indicate an internal bug.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoWitness
            | Error::InternalInconsistency { .. }
            | Error::SpectrumViolation { .. }
            | Error::Mismatch { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
