//! Git history mining: first-parent commit walking, per-commit method
//! diffing, refactoring-aware identity tracking, and creation-event
//! extraction.

mod track;

pub use track::{
    detect_refactorings, diff_methods, extract_creations, link_histories, jaccard_similarity,
    CreationEventRecord, HistoryBuilder, LinkKind, MethodCreationEvent, MethodDiff, MethodHistory,
    MethodSet, RefactoringLink, TrackedMethod,
};

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use git2::{BranchType, Delta, DiffFindOptions, DiffOptions, Oid, Repository};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, normalize, ParsedMethod};
use crate::error::Error;
use crate::Result;

/// Identity of a method within one commit tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodKey {
    pub file_path: String,
    pub class_name: String,
    pub method_name: String,
    pub param_types: Vec<String>,
}

impl std::fmt::Display for MethodKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}:{}.{}({})",
            self.file_path,
            self.class_name,
            self.method_name,
            self.param_types.join(",")
        )
    }
}

/// One method's source and location at a specific commit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSnapshot {
    pub key: MethodKey,
    /// Source text of the method including its signature.
    pub body_text: String,
    /// Hash of the normalized body; see [`analysis::normalize`].
    pub body_hash: String,
    pub commit_sha: String,
    pub start_line: u32,
    pub end_line: u32,
}

/// Kind of change a commit applied to one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FileChange {
    Added,
    Deleted,
    Modified,
    Renamed { from: String },
}

/// One commit on the first-parent linearization of the mined branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommitRecord {
    pub sha: String,
    pub parent_shas: Vec<String>,
    /// Author timestamp, seconds since epoch (UTC). Reporting only; all
    /// ordering decisions use `order_index`.
    pub author_time: i64,
    /// Position in the first-parent linearization, 0 at the root.
    pub order_index: usize,
    pub changed_files: Vec<(String, FileChange)>,
}

/// Walks the first-parent history of `branch` from root to tip.
///
/// Each commit is annotated with its file changes relative to its first
/// parent, with git-native rename detection enabled. An empty repository
/// yields an empty list; a missing branch in a non-empty repository is an
/// error.
pub fn walk_history(repo_path: &Path, branch: &str) -> Result<Vec<CommitRecord>> {
    let repo = open_repo(repo_path)?;
    Ok(scan_history(&repo, repo_path, branch)?.0)
}

fn open_repo(repo_path: &Path) -> Result<Repository> {
    Repository::open(repo_path).map_err(|_| Error::RepoNotFound(repo_path.to_path_buf()))
}

/// Blob-level work items for one commit: the `.java` files to parse on each
/// side of the diff.
#[derive(Debug, Clone, Default)]
struct CommitJobs {
    /// (path at parent, blob oid) pairs to parse on the parent side.
    old: Vec<(String, Oid)>,
    /// (path at commit, blob oid) pairs to parse on the child side.
    new: Vec<(String, Oid)>,
    /// `.java` file renames (old path → new path) detected by git.
    renames: Vec<(String, String)>,
}

fn scan_history(
    repo: &Repository,
    repo_path: &Path,
    branch: &str,
) -> Result<(Vec<CommitRecord>, Vec<CommitJobs>)> {
    if repo.is_empty()? {
        return Ok((Vec::new(), Vec::new()));
    }
    let branch_ref = repo
        .find_branch(branch, BranchType::Local)
        .map_err(|_| Error::BranchNotFound {
            repo: repo_path.to_path_buf(),
            branch: branch.to_string(),
        })?;
    let tip = branch_ref.get().peel_to_commit()?;

    // First-parent chain, tip to root.
    let mut chain = vec![tip];
    while let Ok(parent) = chain.last().unwrap().parent(0) {
        chain.push(parent);
    }
    chain.reverse();

    let mut records = Vec::with_capacity(chain.len());
    let mut jobs = Vec::with_capacity(chain.len());
    for (order_index, commit) in chain.iter().enumerate() {
        let parent_tree = match commit.parent(0) {
            Ok(parent) => Some(parent.tree()?),
            Err(_) => None,
        };
        let tree = commit.tree()?;
        let mut opts = DiffOptions::new();
        let mut diff =
            repo.diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))?;
        diff.find_similar(Some(DiffFindOptions::new().renames(true)))?;

        let mut changed_files = Vec::new();
        let mut commit_jobs = CommitJobs::default();
        for delta in diff.deltas() {
            let old_path = delta.old_file().path().map(path_to_string);
            let new_path = delta.new_file().path().map(path_to_string);
            let (path, change) = match delta.status() {
                Delta::Added | Delta::Copied => match new_path.clone() {
                    Some(p) => (p, FileChange::Added),
                    None => continue,
                },
                Delta::Deleted => match old_path.clone() {
                    Some(p) => (p, FileChange::Deleted),
                    None => continue,
                },
                Delta::Modified | Delta::Typechange => match new_path.clone() {
                    Some(p) => (p, FileChange::Modified),
                    None => continue,
                },
                Delta::Renamed => match (old_path.clone(), new_path.clone()) {
                    (Some(from), Some(p)) => (p, FileChange::Renamed { from }),
                    _ => continue,
                },
                _ => continue,
            };

            let old_side = matches!(
                delta.status(),
                Delta::Deleted | Delta::Modified | Delta::Typechange | Delta::Renamed
            );
            let new_side = matches!(
                delta.status(),
                Delta::Added | Delta::Copied | Delta::Modified | Delta::Typechange | Delta::Renamed
            );
            if old_side {
                if let Some(p) = &old_path {
                    if is_java(p) {
                        commit_jobs.old.push((p.clone(), delta.old_file().id()));
                    }
                }
            }
            if new_side {
                if let Some(p) = &new_path {
                    if is_java(p) {
                        commit_jobs.new.push((p.clone(), delta.new_file().id()));
                    }
                }
            }
            if delta.status() == Delta::Renamed {
                if let (Some(from), Some(to)) = (&old_path, &new_path) {
                    if is_java(from) && is_java(to) {
                        commit_jobs.renames.push((from.clone(), to.clone()));
                    }
                }
            }
            changed_files.push((path, change));
        }
        changed_files.sort();
        commit_jobs.old.sort();
        commit_jobs.new.sort();
        commit_jobs.renames.sort();

        records.push(CommitRecord {
            sha: commit.id().to_string(),
            parent_shas: commit.parent_ids().map(|id| id.to_string()).collect(),
            author_time: commit.author().when().seconds(),
            order_index,
            changed_files,
        });
        jobs.push(commit_jobs);
    }
    Ok((records, jobs))
}

fn path_to_string(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

fn is_java(path: &str) -> bool {
    path.ends_with(".java")
}

/// Methods parsed from one commit's full tree.
#[derive(Debug)]
pub struct SnapshotParse {
    pub methods: Vec<ParsedMethod>,
    pub warnings: Vec<String>,
}

/// Parses every `.java` file in the tree of `commit_sha`. Files that cannot
/// be parsed are skipped with a warning; the commit itself must exist.
pub fn take_snapshot(repo_path: &Path, commit_sha: &str) -> Result<SnapshotParse> {
    let repo = open_repo(repo_path)?;
    let oid = Oid::from_str(commit_sha)?;
    let commit = repo
        .find_commit(oid)
        .map_err(|source| Error::UnreadableObject {
            oid: commit_sha.to_string(),
            commit: commit_sha.to_string(),
            source,
        })?;
    let tree = commit.tree()?;

    let mut files = Vec::new();
    tree.walk(git2::TreeWalkMode::PreOrder, |dir, entry| {
        if entry.kind() == Some(git2::ObjectType::Blob) {
            if let Some(name) = entry.name() {
                let path = format!("{dir}{name}");
                if is_java(&path) {
                    files.push((path, entry.id()));
                }
            }
        }
        git2::TreeWalkResult::Ok
    })?;
    files.sort();

    let mut blobs = Vec::with_capacity(files.len());
    for (path, blob_oid) in &files {
        let blob = repo
            .find_blob(*blob_oid)
            .map_err(|source| Error::UnreadableObject {
                oid: blob_oid.to_string(),
                commit: commit_sha.to_string(),
                source,
            })?;
        blobs.push((path.clone(), blob.content().to_vec()));
    }

    let parsed: Vec<(Vec<ParsedMethod>, Vec<String>)> = blobs
        .par_iter()
        .map(|(path, content)| match std::str::from_utf8(content) {
            Ok(text) => {
                let mut parse = analysis::parse_methods(text, path);
                for method in &mut parse.methods {
                    method.snapshot.commit_sha = commit_sha.to_string();
                }
                (parse.methods, parse.warnings)
            }
            Err(_) => (
                Vec::new(),
                vec![format!("skipping non-UTF-8 file {path}")],
            ),
        })
        .collect();

    let mut methods = Vec::new();
    let mut warnings = Vec::new();
    for (m, w) in parsed {
        methods.extend(m);
        warnings.extend(w);
    }
    Ok(SnapshotParse { methods, warnings })
}

/// Tunables for [`mine_repository`].
#[derive(Debug, Clone)]
pub struct MineOptions {
    /// Minimum token Jaccard similarity for fuzzy rename links.
    pub rename_threshold: f64,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            rename_threshold: 0.8,
        }
    }
}

/// Everything mined from one repository.
#[derive(Debug)]
pub struct MineResult {
    pub commits: Vec<CommitRecord>,
    pub histories: Vec<MethodHistory>,
    pub events: Vec<MethodCreationEvent>,
    pub warnings: Vec<String>,
}

/// Methods parsed from one blob, with the file path and commit left blank.
struct BlobParse {
    methods: Vec<BlobMethod>,
    warnings: Vec<String>,
}

struct BlobMethod {
    snapshot: MethodSnapshot,
    tokens: Arc<std::collections::BTreeSet<String>>,
}

fn parse_blob(text: &str) -> BlobParse {
    let parse = analysis::parse_methods(text, "");
    let methods = parse
        .methods
        .iter()
        .map(|m| BlobMethod {
            snapshot: m.snapshot.clone(),
            tokens: Arc::new(normalize::normalized_token_set(m)),
        })
        .collect();
    BlobParse {
        methods,
        warnings: parse.warnings,
    }
}

/// Walks the whole history of a branch, diffs methods per commit, links
/// identities across renames and moves, and returns the tracked histories
/// together with their creation events.
///
/// Parsing is cached per blob and may run on multiple threads; the history
/// fold itself is sequential over `order_index`, so results are independent
/// of the degree of parallelism.
pub fn mine_repository(
    repo_path: &Path,
    branch: &str,
    options: &MineOptions,
) -> Result<MineResult> {
    let repo = open_repo(repo_path)?;
    let (commits, jobs) = scan_history(&repo, repo_path, branch)?;

    // Read every unique blob once, remembering where it was first seen.
    let mut blob_bytes: HashMap<Oid, Option<String>> = HashMap::new();
    let mut first_seen: Vec<(Oid, String, String)> = Vec::new();
    let mut warnings = Vec::new();
    for (commit_jobs, commit) in jobs.iter().zip(&commits) {
        for (path, oid) in commit_jobs.old.iter().chain(&commit_jobs.new) {
            if blob_bytes.contains_key(oid) {
                continue;
            }
            let blob = repo.find_blob(*oid).map_err(|source| Error::UnreadableObject {
                oid: oid.to_string(),
                commit: commit.sha.clone(),
                source,
            })?;
            match std::str::from_utf8(blob.content()) {
                Ok(text) => {
                    blob_bytes.insert(*oid, Some(text.to_string()));
                    first_seen.push((*oid, path.clone(), commit.sha.clone()));
                }
                Err(_) => {
                    warnings.push(format!(
                        "skipping non-UTF-8 file {path} at commit {}",
                        commit.sha
                    ));
                    blob_bytes.insert(*oid, None);
                }
            }
        }
    }

    // Parse each blob once, in parallel; parsing is pure.
    let parsed: HashMap<Oid, BlobParse> = first_seen
        .par_iter()
        .map(|(oid, _, _)| (*oid, parse_blob(blob_bytes[oid].as_ref().unwrap())))
        .collect();
    for (oid, path, sha) in &first_seen {
        for warning in &parsed[oid].warnings {
            warnings.push(format!("{path} at commit {sha}: {warning}"));
        }
    }

    // Sequential fold over commits in order.
    let mut builder = HistoryBuilder::new();
    for (commit, commit_jobs) in commits.iter().zip(&jobs) {
        let parent_sha = commit.parent_shas.first().cloned().unwrap_or_default();
        let parent_set = bind_side(&parsed, &commit_jobs.old, &parent_sha);
        let child_set = bind_side(&parsed, &commit_jobs.new, &commit.sha);
        let diff = diff_methods(&parent_set, &child_set);
        let links = detect_refactorings(
            &diff.added,
            &diff.deleted,
            &commit_jobs.renames,
            options.rename_threshold,
        );
        builder.apply_commit(commit, &diff, &links)?;
    }
    let histories = builder.finish();
    let events = extract_creations(&histories, &commits);
    Ok(MineResult {
        commits,
        histories,
        events,
        warnings,
    })
}

fn bind_side(
    parsed: &HashMap<Oid, BlobParse>,
    side: &[(String, Oid)],
    commit_sha: &str,
) -> MethodSet {
    let mut set = MethodSet::new();
    for (path, oid) in side {
        let Some(blob) = parsed.get(oid) else {
            continue; // non-UTF-8, already warned
        };
        for method in &blob.methods {
            let mut snapshot = method.snapshot.clone();
            snapshot.key.file_path = path.clone();
            snapshot.commit_sha = commit_sha.to_string();
            let key = snapshot.key.clone();
            set.insert(
                key,
                TrackedMethod {
                    snapshot,
                    tokens: Arc::clone(&method.tokens),
                },
            );
        }
    }
    set
}
