//! Flat TOML configuration holding every pipeline tunable. Unknown keys are
//! rejected; each knob has the documented default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_STUB;
use crate::dataset::{DatasetOptions, ReprKind, SplitSpec};
use crate::error::Error;
use crate::eval::{BootstrapParams, ChrfParams};
use crate::miner::MineOptions;
use crate::repr::PathExtractionParams;
use crate::subtokens::SplitOptions;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Branch to mine.
    pub branch: String,
    /// Fraction of creation events the snapshot commit covers.
    pub snapshot_ratio: f64,
    /// Minimum post-dedup test samples; below it the project is rejected.
    pub min_test_samples: usize,
    /// Test-sample count from which a project counts as large.
    pub large_project_threshold: usize,
    /// Minimum token Jaccard similarity for fuzzy rename links.
    pub rename_threshold: f64,
    /// Maximum node count of an extracted path.
    pub max_path_length: usize,
    /// Maximum leaf-index distance of a path-context pair.
    pub max_path_width: usize,
    /// Per-method path-context cap before sampling kicks in.
    pub max_path_contexts: usize,
    pub path_sampling_seed: u64,
    /// Highest character n-gram order of ChrF.
    pub chrf_max_ngram: usize,
    pub chrf_beta: f64,
    pub bootstrap_resamples: usize,
    /// Win probability above which a bootstrap comparison is significant.
    pub bootstrap_significance: f64,
    pub bootstrap_seed: u64,
    /// Representations to emit and dedup against.
    pub representations: Vec<String>,
    /// Give digit runs their own sub-tokens.
    pub digit_subtokens: bool,
    /// Replacement token for masked method names.
    pub recursion_stub: String,
    /// Attach representation fields to emitted dataset records.
    pub emit_representations: bool,
    pub output_dir: PathBuf,
    /// Parallel projects in `run`; 0 picks the thread-pool default.
    pub jobs: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            branch: "master".into(),
            snapshot_ratio: 0.8,
            min_test_samples: 20,
            large_project_threshold: 100,
            rename_threshold: 0.8,
            max_path_length: 9,
            max_path_width: 2,
            max_path_contexts: 200,
            path_sampling_seed: 0,
            chrf_max_ngram: 6,
            chrf_beta: 2.0,
            bootstrap_resamples: 10_000,
            bootstrap_significance: 0.95,
            bootstrap_seed: 0,
            representations: vec!["tokens".into(), "ast".into(), "path_contexts".into()],
            digit_subtokens: true,
            recursion_stub: DEFAULT_STUB.into(),
            emit_representations: true,
            output_dir: PathBuf::from("out"),
            jobs: 0,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Config = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.split_spec().validate()?;
        if !(0.0..=1.0).contains(&self.rename_threshold) {
            return Err(Error::Config(format!(
                "rename_threshold must be in [0,1], got {}",
                self.rename_threshold
            )));
        }
        if self.max_path_length == 0 {
            return Err(Error::Config("max_path_length must be at least 1".into()));
        }
        if self.max_path_contexts == 0 {
            return Err(Error::Config("max_path_contexts must be at least 1".into()));
        }
        if self.chrf_max_ngram == 0 || self.chrf_max_ngram > 32 {
            return Err(Error::Config(format!(
                "chrf_max_ngram must be in 1..=32, got {}",
                self.chrf_max_ngram
            )));
        }
        if self.chrf_beta <= 0.0 {
            return Err(Error::Config(format!(
                "chrf_beta must be positive, got {}",
                self.chrf_beta
            )));
        }
        if self.bootstrap_resamples == 0 {
            return Err(Error::Config("bootstrap_resamples must be at least 1".into()));
        }
        if !(0.5..1.0).contains(&self.bootstrap_significance) {
            return Err(Error::Config(format!(
                "bootstrap_significance must be in [0.5,1), got {}",
                self.bootstrap_significance
            )));
        }
        if self.recursion_stub.is_empty() || self.recursion_stub.chars().any(char::is_whitespace) {
            return Err(Error::Config(
                "recursion_stub must be a nonempty token without whitespace".into(),
            ));
        }
        self.repr_kinds()?;
        Ok(())
    }

    pub fn repr_kinds(&self) -> Result<Vec<ReprKind>> {
        let mut kinds = Vec::new();
        for name in &self.representations {
            let kind: ReprKind = name.parse()?;
            if kinds.contains(&kind) {
                return Err(Error::Config(format!("duplicate representation {name:?}")));
            }
            kinds.push(kind);
        }
        Ok(kinds)
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            snapshot_ratio: self.snapshot_ratio,
            min_test_samples: self.min_test_samples,
            large_project_threshold: self.large_project_threshold,
        }
    }

    pub fn mine_options(&self) -> MineOptions {
        MineOptions {
            rename_threshold: self.rename_threshold,
        }
    }

    pub fn path_params(&self) -> PathExtractionParams {
        PathExtractionParams {
            max_path_length: self.max_path_length,
            max_path_width: self.max_path_width,
            max_contexts: self.max_path_contexts,
            sampling_seed: self.path_sampling_seed,
        }
    }

    pub fn chrf_params(&self) -> ChrfParams {
        ChrfParams {
            max_n: self.chrf_max_ngram,
            beta: self.chrf_beta,
        }
    }

    pub fn bootstrap_params(&self) -> BootstrapParams {
        BootstrapParams {
            n_resamples: self.bootstrap_resamples,
            significance_level: self.bootstrap_significance,
            seed: self.bootstrap_seed,
        }
    }

    pub fn split_options(&self) -> SplitOptions {
        SplitOptions {
            split_digits: self.digit_subtokens,
        }
    }

    pub fn dataset_options(&self, project: &str) -> Result<DatasetOptions> {
        Ok(DatasetOptions {
            project: project.to_string(),
            spec: self.split_spec(),
            stub: self.recursion_stub.clone(),
            split_options: self.split_options(),
            representations: self.repr_kinds()?,
            emit_representations: self.emit_representations,
            path_params: self.path_params(),
        })
    }
}
