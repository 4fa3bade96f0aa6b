//! Error type shared across the pipeline.
//!
//! Variants are grouped so that the CLI can map them onto its documented
//! exit codes: repository problems, project rejection, and input-schema
//! violations are distinguishable from plain I/O failures.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("repository not found at {0}")]
    RepoNotFound(PathBuf),

    #[error("branch {branch:?} not found in {repo}")]
    BranchNotFound { repo: PathBuf, branch: String },

    #[error("unreadable object {oid} (commit {commit}): {source}")]
    UnreadableObject {
        oid: String,
        commit: String,
        source: git2::Error,
    },

    #[error("repository has no commits on the requested branch")]
    EmptyRepository,

    #[error(transparent)]
    Git(#[from] git2::Error),

    #[error("project rejected: {reason}")]
    ProjectRejected { reason: String },

    #[error("conflicting refactoring links: {0}")]
    ConflictingLinks(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("predictions reference unknown method ids: {}", .0.join(", "))]
    UnknownPredictionIds(Vec<String>),

    #[error("duplicate prediction ids: {}", .0.join(", "))]
    DuplicatePredictionIds(Vec<String>),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("score lists are not aligned: {0}")]
    MisalignedScores(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by an unusable or missing repository.
    pub fn is_repo_error(&self) -> bool {
        matches!(
            self,
            Error::RepoNotFound(_)
                | Error::BranchNotFound { .. }
                | Error::UnreadableObject { .. }
                | Error::EmptyRepository
                | Error::Git(_)
        )
    }

    /// True for malformed inputs: bad config values, bad prediction files,
    /// bad dataset records.
    pub fn is_schema_error(&self) -> bool {
        matches!(
            self,
            Error::Schema(_)
                | Error::UnknownPredictionIds(_)
                | Error::DuplicatePredictionIds(_)
                | Error::Config(_)
        )
    }
}
