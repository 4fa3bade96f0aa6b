//! Two non-neural reference predictors, so the evaluation pipeline can run
//! end-to-end without a trained model.
//!
//! Both are fitted on the training partition only.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis;
use crate::dataset::DatasetRecord;
use crate::error::Error;
use crate::miner::jaccard_similarity;
use crate::repr;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    /// Always predicts the most frequent training name.
    MostFrequent,
    /// Predicts the name of the token-wise most similar training method.
    NearestNeighbor,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::MostFrequent => "most_frequent",
            BaselineKind::NearestNeighbor => "nearest_neighbor",
        }
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "most_frequent" => Ok(BaselineKind::MostFrequent),
            "nearest_neighbor" => Ok(BaselineKind::NearestNeighbor),
            other => Err(Error::Config(format!(
                "unknown baseline {other:?}; expected most_frequent or nearest_neighbor"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
struct NeighborEntry {
    id: String,
    name_subtokens: Vec<String>,
    tokens: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub enum BaselineModel {
    MostFrequent { top: Vec<String> },
    NearestNeighbor { corpus: Vec<NeighborEntryOpaque> },
}

/// Fitted state of one nearest-neighbor corpus entry; opaque on purpose.
#[derive(Debug, Clone)]
pub struct NeighborEntryOpaque(NeighborEntry);

/// Distinct lexer tokens of a record, from its emitted `tokens` field or by
/// re-parsing the masked source.
fn record_token_set(record: &DatasetRecord) -> Result<BTreeSet<String>> {
    if let Some(tokens) = &record.tokens {
        return Ok(tokens.iter().cloned().collect());
    }
    let method =
        analysis::parse_single_method(&record.masked_source, &record.file_path, &record.class_name)
            .ok_or_else(|| {
                Error::Schema(format!(
                    "record {} has no tokens field and its source does not parse",
                    record.id
                ))
            })?;
    Ok(repr::tokenize(&method).tokens.into_iter().collect())
}

/// Fits a baseline on the training partition. Errors on an empty corpus.
pub fn fit(kind: BaselineKind, training: &[DatasetRecord]) -> Result<BaselineModel> {
    if training.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    match kind {
        BaselineKind::MostFrequent => {
            let mut counts: BTreeMap<&[String], usize> = BTreeMap::new();
            for record in training {
                *counts.entry(&record.name_subtokens).or_insert(0) += 1;
            }
            // Ties break toward the lexicographically smaller sequence,
            // which is the first one the sorted map yields.
            let mut best: Option<(&[String], usize)> = None;
            for (sequence, count) in counts {
                if best.map_or(true, |(_, c)| count > c) {
                    best = Some((sequence, count));
                }
            }
            Ok(BaselineModel::MostFrequent {
                top: best.expect("nonempty corpus").0.to_vec(),
            })
        }
        BaselineKind::NearestNeighbor => {
            let mut corpus = Vec::with_capacity(training.len());
            for record in training {
                corpus.push(NeighborEntryOpaque(NeighborEntry {
                    id: record.id.clone(),
                    name_subtokens: record.name_subtokens.clone(),
                    tokens: record_token_set(record)?,
                }));
            }
            Ok(BaselineModel::NearestNeighbor { corpus })
        }
    }
}

/// Predicts the name sub-tokens for one record.
pub fn predict(model: &BaselineModel, record: &DatasetRecord) -> Result<Vec<String>> {
    match model {
        BaselineModel::MostFrequent { top } => Ok(top.clone()),
        BaselineModel::NearestNeighbor { corpus } => {
            let tokens = record_token_set(record)?;
            let mut best: Option<(f64, &NeighborEntry)> = None;
            for NeighborEntryOpaque(entry) in corpus {
                let similarity = jaccard_similarity(&tokens, &entry.tokens);
                let better = match best {
                    None => true,
                    Some((s, e)) => {
                        similarity > s || (similarity == s && entry.id < e.id)
                    }
                };
                if better {
                    best = Some((similarity, entry));
                }
            }
            Ok(best.expect("nonempty corpus").1.name_subtokens.clone())
        }
    }
}
