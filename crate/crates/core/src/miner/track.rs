//! Method identity tracking across commits.
//!
//! A commit's method-level diff yields added, deleted, and modified methods.
//! Deleted/added pairs are then matched into refactoring links (exact-body
//! matches first, then token-Jaccard fuzzy matches, then file-rename
//! induced moves), and histories are built by a forward chain over commits:
//! an added method without an incoming link starts a new history, a linked
//! method continues the source history, a deletion without an outgoing link
//! ends one.

use std::collections::BTreeSet;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CommitRecord, MethodKey, MethodSnapshot};
use crate::error::Error;
use crate::Result;

/// A method snapshot plus the distinct-token set of its normalized body.
#[derive(Debug, Clone)]
pub struct TrackedMethod {
    pub snapshot: MethodSnapshot,
    pub tokens: Arc<BTreeSet<String>>,
}

/// Methods of one diff side, keyed by identity.
pub type MethodSet = BTreeMap<MethodKey, TrackedMethod>;

/// Method-level difference between a commit and its first parent.
#[derive(Debug, Default)]
pub struct MethodDiff {
    pub added: MethodSet,
    pub deleted: MethodSet,
    pub modified: Vec<(TrackedMethod, TrackedMethod)>,
}

/// Splits two method sets into added / deleted / modified. Methods with the
/// same key and the same normalized-body hash appear in none of the outputs.
pub fn diff_methods(parent: &MethodSet, child: &MethodSet) -> MethodDiff {
    let mut diff = MethodDiff::default();
    for (key, parent_method) in parent {
        match child.get(key) {
            None => {
                diff.deleted.insert(key.clone(), parent_method.clone());
            }
            Some(child_method) => {
                if child_method.snapshot.body_hash != parent_method.snapshot.body_hash {
                    diff.modified
                        .push((parent_method.clone(), child_method.clone()));
                }
            }
        }
    }
    for (key, child_method) in child {
        if !parent.contains_key(key) {
            diff.added.insert(key.clone(), child_method.clone());
        }
    }
    diff
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    MethodRename,
    MethodMove,
    ClassMoveOrRename,
    FileRename,
}

/// An identity edge between a deleted and an added method in one commit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefactoringLink {
    pub kind: LinkKind,
    pub from_key: MethodKey,
    pub to_key: MethodKey,
    pub similarity: f64,
}

/// Distinct-token Jaccard similarity; 1.0 when both sets are empty.
pub fn jaccard_similarity(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    if union == 0 {
        1.0
    } else {
        intersection as f64 / union as f64
    }
}

/// Matches deleted methods against added methods of one commit.
///
/// Greedy maximum-similarity matching: exact normalized-body matches link
/// with similarity 1.0, remaining pairs link when their token Jaccard
/// similarity reaches `rename_threshold`. Ties break on higher similarity,
/// then on lexicographic (from_key, to_key). Afterwards, git-detected file
/// renames link leftover methods whose keys differ only in the file path.
/// Every method participates in at most one link.
pub fn detect_refactorings(
    added: &MethodSet,
    deleted: &MethodSet,
    file_renames: &[(String, String)],
    rename_threshold: f64,
) -> Vec<RefactoringLink> {
    let mut candidates: Vec<RefactoringLink> = Vec::new();
    for (from_key, from) in deleted {
        for (to_key, to) in added {
            let similarity = if from.snapshot.body_hash == to.snapshot.body_hash {
                1.0
            } else {
                let s = jaccard_similarity(&from.tokens, &to.tokens);
                if s < rename_threshold {
                    continue;
                }
                s
            };
            let kind = if from_key.file_path == to_key.file_path
                && from_key.class_name == to_key.class_name
            {
                LinkKind::MethodRename
            } else {
                LinkKind::MethodMove
            };
            candidates.push(RefactoringLink {
                kind,
                from_key: from_key.clone(),
                to_key: to_key.clone(),
                similarity,
            });
        }
    }
    candidates.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then_with(|| a.from_key.cmp(&b.from_key))
            .then_with(|| a.to_key.cmp(&b.to_key))
    });

    let mut used_from: BTreeSet<MethodKey> = BTreeSet::new();
    let mut used_to: BTreeSet<MethodKey> = BTreeSet::new();
    let mut links = Vec::new();
    for candidate in candidates {
        if used_from.contains(&candidate.from_key) || used_to.contains(&candidate.to_key) {
            continue;
        }
        used_from.insert(candidate.from_key.clone());
        used_to.insert(candidate.to_key.clone());
        links.push(candidate);
    }

    // File renames carry along methods whose bodies changed too much for the
    // fuzzy matcher, as long as the rest of the key is untouched.
    let renames: BTreeMap<&str, &str> = file_renames
        .iter()
        .map(|(old, new)| (old.as_str(), new.as_str()))
        .collect();
    for (from_key, from) in deleted {
        if used_from.contains(from_key) {
            continue;
        }
        let Some(new_path) = renames.get(from_key.file_path.as_str()) else {
            continue;
        };
        let to_key = MethodKey {
            file_path: (*new_path).to_string(),
            ..from_key.clone()
        };
        if used_to.contains(&to_key) {
            continue;
        }
        let Some(to) = added.get(&to_key) else {
            continue;
        };
        links.push(RefactoringLink {
            kind: LinkKind::ClassMoveOrRename,
            from_key: from_key.clone(),
            to_key: to_key.clone(),
            similarity: jaccard_similarity(&from.tokens, &to.tokens),
        });
        used_from.insert(from_key.clone());
        used_to.insert(to_key);
    }
    links
}

/// The chain of snapshots of one logical method across commits.
#[derive(Debug, Clone)]
pub struct MethodHistory {
    pub history_id: u64,
    /// Snapshots in commit order; the first one is the creation.
    pub snapshots: Vec<MethodSnapshot>,
    pub links: Vec<RefactoringLink>,
}

/// The commit at which a logical method's first version enters the
/// repository.
#[derive(Debug, Clone)]
pub struct MethodCreationEvent {
    pub history_id: u64,
    pub snapshot: MethodSnapshot,
    pub commit_sha: String,
    pub author_time: i64,
    pub order_index: usize,
}

/// JSONL shape of one creation event.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreationEventRecord {
    pub history_id: u64,
    pub commit_sha: String,
    pub author_time: i64,
    pub order_index: usize,
    pub file_path: String,
    pub class_name: String,
    pub method_name: String,
    pub param_types: Vec<String>,
    pub body: String,
    pub start_line: u32,
    pub end_line: u32,
}

impl From<&MethodCreationEvent> for CreationEventRecord {
    fn from(event: &MethodCreationEvent) -> Self {
        CreationEventRecord {
            history_id: event.history_id,
            commit_sha: event.commit_sha.clone(),
            author_time: event.author_time,
            order_index: event.order_index,
            file_path: event.snapshot.key.file_path.clone(),
            class_name: event.snapshot.key.class_name.clone(),
            method_name: event.snapshot.key.method_name.clone(),
            param_types: event.snapshot.key.param_types.clone(),
            body: event.snapshot.body_text.clone(),
            start_line: event.snapshot.start_line,
            end_line: event.snapshot.end_line,
        }
    }
}

/// Sequential fold building method histories commit by commit.
#[derive(Debug, Default)]
pub struct HistoryBuilder {
    live: HashMap<MethodKey, usize>,
    histories: Vec<MethodHistory>,
}

impl HistoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn apply_commit(
        &mut self,
        commit: &CommitRecord,
        diff: &MethodDiff,
        links: &[RefactoringLink],
    ) -> Result<()> {
        let mut incoming: BTreeMap<&MethodKey, &RefactoringLink> = BTreeMap::new();
        let mut outgoing: BTreeSet<&MethodKey> = BTreeSet::new();
        for link in links {
            if incoming.insert(&link.to_key, link).is_some() {
                return Err(Error::ConflictingLinks(format!(
                    "two links target {} at commit {}",
                    link.to_key, commit.sha
                )));
            }
            if !outgoing.insert(&link.from_key) {
                return Err(Error::ConflictingLinks(format!(
                    "two links leave {} at commit {}",
                    link.from_key, commit.sha
                )));
            }
        }

        // Deletions that are not rename sources end their histories.
        for key in diff.deleted.keys() {
            if !outgoing.contains(key) {
                self.live.remove(key);
            }
        }

        // In-place modifications extend the owning history.
        for (_, new) in &diff.modified {
            match self.live.get(&new.snapshot.key) {
                Some(&idx) => self.histories[idx].snapshots.push(new.snapshot.clone()),
                // A modification to a method we never saw added can only
                // happen on histories that predate the walk (e.g. grafted
                // repositories); treat it as a fresh creation.
                None => self.start_history(new.snapshot.clone()),
            }
        }

        // Additions either continue a linked history or start a new one.
        for (key, method) in &diff.added {
            if let Some(link) = incoming.get(key) {
                if let Some(idx) = self.live.remove(&link.from_key) {
                    self.histories[idx].snapshots.push(method.snapshot.clone());
                    self.histories[idx].links.push((*link).clone());
                    self.live.insert(key.clone(), idx);
                    continue;
                }
            }
            self.start_history(method.snapshot.clone());
        }
        Ok(())
    }

    fn start_history(&mut self, snapshot: MethodSnapshot) {
        let idx = self.histories.len();
        self.live.insert(snapshot.key.clone(), idx);
        self.histories.push(MethodHistory {
            history_id: idx as u64,
            snapshots: vec![snapshot],
            links: Vec::new(),
        });
    }

    pub fn finish(self) -> Vec<MethodHistory> {
        self.histories
    }
}

/// Builds all histories from pre-computed per-commit diffs and links.
pub fn link_histories(
    commits: &[CommitRecord],
    diffs: &[MethodDiff],
    links: &[Vec<RefactoringLink>],
) -> Result<Vec<MethodHistory>> {
    assert_eq!(commits.len(), diffs.len());
    assert_eq!(commits.len(), links.len());
    let mut builder = HistoryBuilder::new();
    for ((commit, diff), commit_links) in commits.iter().zip(diffs).zip(links) {
        builder.apply_commit(commit, diff, commit_links)?;
    }
    Ok(builder.finish())
}

/// One creation event per history, sorted by (order_index, file path,
/// method name).
pub fn extract_creations(
    histories: &[MethodHistory],
    commits: &[CommitRecord],
) -> Vec<MethodCreationEvent> {
    let by_sha: HashMap<&str, &CommitRecord> =
        commits.iter().map(|c| (c.sha.as_str(), c)).collect();
    let mut events: Vec<MethodCreationEvent> = histories
        .iter()
        .map(|history| {
            let first = &history.snapshots[0];
            let commit = by_sha
                .get(first.commit_sha.as_str())
                .expect("creation commit present in walk");
            MethodCreationEvent {
                history_id: history.history_id,
                snapshot: first.clone(),
                commit_sha: commit.sha.clone(),
                author_time: commit.author_time,
                order_index: commit.order_index,
            }
        })
        .collect();
    events.sort_by(|a, b| {
        (a.order_index, &a.snapshot.key.file_path, &a.snapshot.key.method_name).cmp(&(
            b.order_index,
            &b.snapshot.key.file_path,
            &b.snapshot.key.method_name,
        ))
    });
    events
}
