//! Library behind the `namemine` tool.
//!
//! The pipeline turns a Java Git repository into a per-project method-name
//! prediction dataset whose training, validation, and testing parts are
//! strictly ordered in time, then scores prediction files against the test
//! part:
//!
//! 1. [`miner`] walks the commit history, tracks method identities across
//!    renames and moves, and extracts method-creation events.
//! 2. [`analysis`] parses Java sources, applies the dataset filtering rules,
//!    strips comments, and masks recursive calls.
//! 3. [`dataset`] picks the snapshot commit covering 80% of the creations,
//!    builds the train/validation/test splits, and deduplicates them.
//! 4. [`repr`] produces token, AST, and path-context representations used
//!    for emission and representation-level dedup.
//! 5. [`eval`] computes sub-token F1 and ChrF and runs paired bootstrap
//!    comparisons between models.
//! 6. [`baselines`] provides two non-neural predictors so the whole loop is
//!    runnable without any trained model.

pub mod analysis;
pub mod baselines;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod io;
pub mod miner;
pub mod repr;
pub mod subtokens;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
