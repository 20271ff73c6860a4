//! JSON file formats for algebras and group actions.
//!
//! An algebra file carries either an explicit median table (`n` plus a flat
//! row-major `median` array of n^3 entries) or a hypercube `embedding` (one
//! bit string per point), never both. An action file lists generator
//! permutations and an optional step distribution `mu` whose weights are
//! exact fractions written as strings.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::action::{validate_action, GroupAction};
use crate::algebra::MedianAlgebra;
use crate::error::{Error, Result};
use crate::measure::{group_measure, GroupMeasure};

/// On-disk form of an algebra. Exactly one representation must be present:
/// `n` + `median`, or `embedding`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<String>>,
}

impl AlgebraFile {
    /// Validates the representation choice and builds the algebra.
    pub fn build(&self) -> Result<MedianAlgebra> {
        match (&self.n, &self.median, &self.embedding) {
            (Some(n), Some(median), None) => MedianAlgebra::from_table(*n, median),
            (None, None, Some(rows)) => MedianAlgebra::from_embedding(rows),
            (None, None, None) => Err(Error::FileFormat {
                reason: "algebra file needs either \"n\" and \"median\" or \"embedding\"".into(),
            }),
            (Some(_) | None, Some(_) | None, Some(_)) => Err(Error::FileFormat {
                reason: "\"embedding\" excludes the \"n\"/\"median\" representation".into(),
            }),
            _ => Err(Error::FileFormat {
                reason: "the table representation needs both \"n\" and \"median\"".into(),
            }),
        }
    }

    /// Serializable snapshot of an algebra, preferring the embedding form
    /// when one is attached (it is smaller and self-describing).
    pub fn from_algebra(m: &MedianAlgebra) -> AlgebraFile {
        if let Some(emb) = m.embedding() {
            let rows = (0..m.n())
                .map(|i| {
                    (0..emb.width())
                        .map(|c| if emb.bit(i, c) { '1' } else { '0' })
                        .collect()
                })
                .collect();
            return AlgebraFile {
                n: None,
                median: None,
                embedding: Some(rows),
            };
        }
        let n = m.n();
        let mut table = Vec::with_capacity(n * n * n);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    table.push(m.med(x, y, z));
                }
            }
        }
        AlgebraFile {
            n: Some(n),
            median: Some(table),
            embedding: None,
        }
    }
}

/// On-disk form of a group action: generator permutations by name, plus an
/// optional step distribution over generator words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionFile {
    pub generators: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub mu: BTreeMap<String, String>,
}

impl ActionFile {
    /// Validates the generators against the algebra and resolves `mu` when
    /// present. Generators are installed in name order, so file key order
    /// never matters.
    pub fn build(
        &self,
        algebra: Arc<MedianAlgebra>,
    ) -> Result<(GroupAction, Option<GroupMeasure>)> {
        if self.generators.is_empty() {
            return Err(Error::FileFormat {
                reason: "action file lists no generators".into(),
            });
        }
        let generators: Vec<(String, Vec<usize>)> = self
            .generators
            .iter()
            .map(|(name, map)| (name.clone(), map.clone()))
            .collect();
        let action = validate_action(algebra, &generators)?;
        if self.mu.is_empty() {
            return Ok((action, None));
        }
        let weights: Vec<(String, BigRational)> = self
            .mu
            .iter()
            .map(|(word, w)| Ok((word.clone(), parse_fraction(w)?)))
            .collect::<Result<_>>()?;
        let mu = group_measure(&action, &weights)?;
        Ok((action, Some(mu)))
    }
}

/// Parses an exact fraction: "p/q" or a bare integer.
pub fn parse_fraction(text: &str) -> Result<BigRational> {
    let bad = |reason: String| Error::FileFormat { reason };
    let int = |part: &str| {
        BigInt::from_str(part.trim())
            .map_err(|_| bad(format!("{text:?} is not a fraction: bad integer {part:?}")))
    };
    match text.split_once('/') {
        None => Ok(BigRational::from_integer(int(text)?)),
        Some((p, q)) => {
            let denom = int(q)?;
            if denom.is_zero() {
                return Err(bad(format!("{text:?} has denominator zero")));
            }
            Ok(BigRational::new(int(p)?, denom))
        }
    }
}

/// Renders a fraction in the "p/q" form the file formats use. Integers keep
/// an explicit denominator of one so the output grammar has a single shape.
pub fn format_fraction(value: &BigRational) -> String {
    if value.denom().is_one() {
        format!("{}/1", value.numer())
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn algebra_from_json(text: &str) -> Result<MedianAlgebra> {
    let file: AlgebraFile = serde_json::from_str(text)?;
    file.build()
}

pub fn algebra_to_json(m: &MedianAlgebra) -> String {
    let file = AlgebraFile::from_algebra(m);
    let mut out = serde_json::to_string_pretty(&file).expect("algebra files always serialize");
    out.push('\n');
    out
}

pub fn action_from_json(
    algebra: Arc<MedianAlgebra>,
    text: &str,
) -> Result<(GroupAction, Option<GroupMeasure>)> {
    let file: ActionFile = serde_json::from_str(text)?;
    file.build(algebra)
}

pub fn read_algebra(path: impl AsRef<Path>) -> Result<MedianAlgebra> {
    algebra_from_json(&std::fs::read_to_string(path)?)
}

pub fn read_action(
    path: impl AsRef<Path>,
    algebra: Arc<MedianAlgebra>,
) -> Result<(GroupAction, Option<GroupMeasure>)> {
    action_from_json(algebra, &std::fs::read_to_string(path)?)
}
