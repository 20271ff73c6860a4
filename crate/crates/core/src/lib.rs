//! Finite median algebras and group actions on them.
//!
//! The crate covers three layers:
//!
//! * structure: intervals, convex hulls, gates, walls, cubes, and the
//!   decomposition of an algebra into its maximal cubical factor;
//! * measure dynamics: the self-median operator on probability measures,
//!   its cubical fixed points, and stationary measures of group walks,
//!   all in exact rational arithmetic;
//! * simulation: reduced-word random walks whose boundary statistics the
//!   structural predictions can be checked against.

// Points are integer ids throughout, so index loops over 0..n are the
// native idiom here and iterator rewrites would only obscure them.
#![allow(clippy::needless_range_loop)]

pub mod action;
pub mod algebra;
pub mod cubes;
pub mod error;
pub mod factor;
pub mod io;
pub mod measure;
pub mod oracle;
pub mod set;
pub mod walk;
pub mod walls;

pub use action::{GroupAction, MinimalityReport, Permutation};
pub use algebra::{ConvexSet, Embedding, MedianAlgebra, SubsetClass, DENSE_LIMIT, MAX_EMBED_WIDTH};
pub use cubes::Cube;
pub use factor::Decomposition;
pub use error::{Error, Result};
pub use io::{ActionFile, AlgebraFile};
pub use measure::{GroupMeasure, Measure, PhiSearchReport, SpectrumReport, StationaryReport};
pub use oracle::{Corpus, CorpusMember, RecheckReport};
pub use set::PointSet;
pub use walk::{WalkConfig, WalkPredictions, WalkReport};
pub use walls::{HalfSpace, Wall, WallEmbedding};
