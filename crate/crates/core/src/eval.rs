//! Scoring of prediction files: sub-token F1, ChrF, per-project aggregation,
//! and paired bootstrap significance tests.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// One line of a predictions JSONL file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub method_id: String,
    pub predicted_subtokens: Vec<String>,
}

/// The out-of-vocabulary marker models may emit; never shown to a user, so
/// it is dropped before scoring.
pub const UNK_TOKEN: &str = "<UNK>";

/// Cleans a predicted sequence: removes `<UNK>` tokens first, then removes
/// repeated sub-tokens keeping the first occurrence.
pub fn clean_prediction(tokens: &[String]) -> Vec<String> {
    dedupe_keep_first(tokens.iter().filter(|t| t.as_str() != UNK_TOKEN))
}

/// Cleans a reference sequence: only removes repeats. Out-of-vocabulary
/// reference tokens stay, since failing to produce them is the model's
/// problem.
pub fn clean_reference(tokens: &[String]) -> Vec<String> {
    dedupe_keep_first(tokens.iter())
}

fn dedupe_keep_first<'a>(tokens: impl Iterator<Item = &'a String>) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for token in tokens {
        if seen.insert(token.as_str()) {
            out.push(token.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Order-insensitive sub-token precision/recall/F1 over cleaned sequences.
/// Matching is exact-string; empty sides score zero.
pub fn subtoken_f1(pred: &[String], reference: &[String]) -> F1Score {
    let pred_set: HashSet<&str> = pred.iter().map(String::as_str).collect();
    let ref_set: HashSet<&str> = reference.iter().map(String::as_str).collect();
    let matched = pred_set.intersection(&ref_set).count() as f64;
    let precision = if pred_set.is_empty() {
        0.0
    } else {
        matched / pred_set.len() as f64
    };
    let recall = if ref_set.is_empty() {
        0.0
    } else {
        matched / ref_set.len() as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    F1Score {
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChrfParams {
    pub max_n: usize,
    pub beta: f64,
}

impl Default for ChrfParams {
    fn default() -> Self {
        ChrfParams {
            max_n: 6,
            beta: 2.0,
        }
    }
}

/// Character n-gram F-beta score over space-joined sub-token sequences.
///
/// For each order `1..=max_n`, precision and recall come from clipped
/// multiset n-gram counts; each side's values are then arithmetically
/// averaged over the orders where that side has at least one n-gram, and a
/// single F-beta is computed from the two means. Whitespace counts as a
/// character. Returns 0 when either side is empty.
pub fn chrf(pred: &[String], reference: &[String], params: &ChrfParams) -> f64 {
    let hyp: Vec<char> = pred.join(" ").chars().collect();
    let refr: Vec<char> = reference.join(" ").chars().collect();
    if hyp.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let mut precisions = Vec::with_capacity(params.max_n);
    let mut recalls = Vec::with_capacity(params.max_n);
    for n in 1..=params.max_n {
        let mut counts: HashMap<&[char], (u64, u64)> = HashMap::new();
        if hyp.len() >= n {
            for gram in hyp.windows(n) {
                counts.entry(gram).or_default().0 += 1;
            }
        }
        if refr.len() >= n {
            for gram in refr.windows(n) {
                counts.entry(gram).or_default().1 += 1;
            }
        }
        let mut hyp_total = 0u64;
        let mut ref_total = 0u64;
        let mut matched = 0u64;
        for (hyp_count, ref_count) in counts.values() {
            hyp_total += hyp_count;
            ref_total += ref_count;
            matched += hyp_count.min(ref_count);
        }
        if hyp_total > 0 {
            precisions.push(matched as f64 / hyp_total as f64);
        }
        if ref_total > 0 {
            recalls.push(matched as f64 / ref_total as f64);
        }
    }
    if precisions.is_empty() || recalls.is_empty() {
        return 0.0;
    }
    let p = precisions.iter().sum::<f64>() / precisions.len() as f64;
    let r = recalls.iter().sum::<f64>() / recalls.len() as f64;
    let beta2 = params.beta * params.beta;
    let denom = beta2 * p + r;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + beta2) * p * r / denom
    }
}

/// Per-prediction scores after cleaning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleScore {
    pub method_id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub chrf: f64,
}

/// Arithmetic means over every test record of one project.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateScore {
    pub project: String,
    pub model: String,
    pub n_samples: usize,
    /// Test records without a prediction; they score zero and are counted
    /// rather than skipped.
    pub n_missing: usize,
    /// References whose cleaned sub-token sequence is empty.
    pub n_empty_references: usize,
    pub mean_f1: f64,
    pub mean_chrf: f64,
    pub size_class: String,
}

/// A test-side reference: record id plus its name sub-tokens.
#[derive(Debug, Clone)]
pub struct Reference {
    pub method_id: String,
    pub name_subtokens: Vec<String>,
}

/// Scores a prediction file against the test references.
///
/// Every reference gets exactly one row, in reference order. Predictions
/// for unknown ids and duplicate prediction ids are hard errors; missing
/// predictions score zero on all metrics and are tallied.
pub fn score_dataset(
    predictions: &[PredictionRecord],
    references: &[Reference],
    chrf_params: &ChrfParams,
    project: &str,
    model: &str,
    size_class: &str,
) -> Result<(Vec<SampleScore>, AggregateScore)> {
    let known: HashSet<&str> = references.iter().map(|r| r.method_id.as_str()).collect();
    let mut by_id: BTreeMap<&str, &PredictionRecord> = BTreeMap::new();
    let mut unknown = Vec::new();
    let mut duplicates = Vec::new();
    for prediction in predictions {
        if !known.contains(prediction.method_id.as_str()) {
            unknown.push(prediction.method_id.clone());
        }
        if by_id.insert(prediction.method_id.as_str(), prediction).is_some() {
            duplicates.push(prediction.method_id.clone());
        }
    }
    if !unknown.is_empty() {
        unknown.sort();
        return Err(Error::UnknownPredictionIds(unknown));
    }
    if !duplicates.is_empty() {
        duplicates.sort();
        duplicates.dedup();
        return Err(Error::DuplicatePredictionIds(duplicates));
    }

    let mut scores = Vec::with_capacity(references.len());
    let mut n_missing = 0usize;
    let mut n_empty_references = 0usize;
    for reference in references {
        let cleaned_ref = clean_reference(&reference.name_subtokens);
        if cleaned_ref.is_empty() {
            n_empty_references += 1;
        }
        let score = match by_id.get(reference.method_id.as_str()) {
            Some(prediction) => {
                let cleaned_pred = clean_prediction(&prediction.predicted_subtokens);
                let f1 = subtoken_f1(&cleaned_pred, &cleaned_ref);
                SampleScore {
                    method_id: reference.method_id.clone(),
                    precision: f1.precision,
                    recall: f1.recall,
                    f1: f1.f1,
                    chrf: chrf(&cleaned_pred, &cleaned_ref, chrf_params),
                }
            }
            None => {
                n_missing += 1;
                SampleScore {
                    method_id: reference.method_id.clone(),
                    precision: 0.0,
                    recall: 0.0,
                    f1: 0.0,
                    chrf: 0.0,
                }
            }
        };
        scores.push(score);
    }

    let n = references.len();
    let mean = |f: &dyn Fn(&SampleScore) -> f64| {
        if n == 0 {
            0.0
        } else {
            scores.iter().map(|s| f(s)).sum::<f64>() / n as f64
        }
    };
    let aggregate = AggregateScore {
        project: project.to_string(),
        model: model.to_string(),
        n_samples: n,
        n_missing,
        n_empty_references,
        mean_f1: mean(&|s| s.f1),
        mean_chrf: mean(&|s| s.chrf),
        size_class: size_class.to_string(),
    };
    Ok((scores, aggregate))
}

/// Which per-sample metric a comparison runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    F1,
    Chrf,
}

impl Metric {
    pub fn of(&self, score: &SampleScore) -> f64 {
        match self {
            Metric::F1 => score.f1,
            Metric::Chrf => score.chrf,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Metric::F1),
            "chrf" => Ok(Metric::Chrf),
            other => Err(Error::Schema(format!(
                "unknown metric {other:?}; expected \"f1\" or \"chrf\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BootstrapParams {
    pub n_resamples: usize,
    pub significance_level: f64,
    pub seed: u64,
}

impl Default for BootstrapParams {
    fn default() -> Self {
        BootstrapParams {
            n_resamples: 10_000,
            significance_level: 0.95,
            seed: 0,
        }
    }
}

/// Outcome of one paired bootstrap run. Win counts are kept in half units
/// (a win is 2 halves, an exact tie credits 1 half to each side) so the two
/// probabilities sum to exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapOutcome {
    pub halves_a: u64,
    pub halves_b: u64,
    pub win_prob_a: f64,
    pub win_prob_b: f64,
    pub significant: bool,
    pub a_wins: bool,
}

/// Paired bootstrap test over aligned per-sample scores.
///
/// Resample `r` draws its indices from a ChaCha stream derived from
/// `(seed, r)`, so results are byte-identical across runs and independent
/// of how resamples are scheduled across threads.
pub fn paired_bootstrap(a: &[f64], b: &[f64], params: &BootstrapParams) -> Result<BootstrapOutcome> {
    if a.len() != b.len() {
        return Err(Error::MisalignedScores(format!(
            "{} vs {} samples",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n == 0 {
        return Err(Error::MisalignedScores("no samples to resample".into()));
    }
    let (halves_a, halves_b) = (0..params.n_resamples)
        .into_par_iter()
        .map(|resample| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(resample as u64);
            let mut sum_a = 0.0f64;
            let mut sum_b = 0.0f64;
            for _ in 0..n {
                let idx = (rng.next_u64() as usize) % n;
                sum_a += a[idx];
                sum_b += b[idx];
            }
            if sum_a > sum_b {
                (2u64, 0u64)
            } else if sum_b > sum_a {
                (0, 2)
            } else {
                (1, 1)
            }
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    let denom = (2 * params.n_resamples) as f64;
    let win_prob_a = halves_a as f64 / denom;
    let win_prob_b = halves_b as f64 / denom;
    let significant = win_prob_a.max(win_prob_b) > params.significance_level;
    Ok(BootstrapOutcome {
        halves_a,
        halves_b,
        win_prob_a,
        win_prob_b,
        significant,
        a_wins: win_prob_a >= win_prob_b,
    })
}

/// One project's verdict in a model-pair comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectComparison {
    pub project: String,
    pub n_samples: usize,
    pub win_prob_a: f64,
    pub win_prob_b: f64,
    pub significant: bool,
    pub winner: Option<String>,
}

/// How many projects each side of a pair wins significantly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub wins_a: usize,
    pub wins_b: usize,
    pub ties: usize,
}

/// Comparison of one ordered model pair across projects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairComparison {
    pub model_a: String,
    pub model_b: String,
    pub metric: Metric,
    pub per_project: Vec<ProjectComparison>,
    pub matrix_cell: MatrixCell,
}

/// Aligned scores of two models on one project.
#[derive(Debug, Clone)]
pub struct ProjectScores {
    pub project: String,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Runs the paired bootstrap for one ordered model pair on every project
/// and tallies the significance matrix cell.
pub fn compare_pair(
    model_a: &str,
    model_b: &str,
    metric: Metric,
    projects: &[ProjectScores],
    params: &BootstrapParams,
) -> Result<PairComparison> {
    let mut per_project = Vec::with_capacity(projects.len());
    let mut cell = MatrixCell {
        wins_a: 0,
        wins_b: 0,
        ties: 0,
    };
    for scores in projects {
        let outcome = paired_bootstrap(&scores.a, &scores.b, params)?;
        let winner = if outcome.significant {
            if outcome.a_wins {
                cell.wins_a += 1;
                Some(model_a.to_string())
            } else {
                cell.wins_b += 1;
                Some(model_b.to_string())
            }
        } else {
            cell.ties += 1;
            None
        };
        per_project.push(ProjectComparison {
            project: scores.project.clone(),
            n_samples: scores.a.len(),
            win_prob_a: outcome.win_prob_a,
            win_prob_b: outcome.win_prob_b,
            significant: outcome.significant,
            winner,
        });
    }
    Ok(PairComparison {
        model_a: model_a.to_string(),
        model_b: model_b.to_string(),
        metric,
        per_project,
        matrix_cell: cell,
    })
}

/// Aligns two score lists by method id; errors when the id sets differ.
pub fn align_scores(
    a: &[SampleScore],
    b: &[SampleScore],
    metric: Metric,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::MisalignedScores(format!(
            "{} vs {} rows",
            a.len(),
            b.len()
        )));
    }
    let by_id: HashMap<&str, &SampleScore> =
        b.iter().map(|s| (s.method_id.as_str(), s)).collect();
    let mut left = Vec::with_capacity(a.len());
    let mut right = Vec::with_capacity(a.len());
    for score in a {
        let Some(other) = by_id.get(score.method_id.as_str()) else {
            return Err(Error::MisalignedScores(format!(
                "method id {} missing from the second score file",
                score.method_id
            )));
        };
        left.push(metric.of(score));
        right.push(metric.of(other));
    }
    Ok((left, right))
}
