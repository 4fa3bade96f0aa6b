//! Chronological dataset construction: snapshot selection, the
//! validation/test halves, two-stage deduplication, and project validation.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, normalize, ParsedMethod};
use crate::error::Error;
use crate::io;
use crate::miner::CreationEventRecord;
use crate::repr::{self, PathExtractionParams, Representation};
use crate::subtokens::{split_subtokens_with, SplitOptions};
use crate::Result;

/// Split tunables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Fraction of creation events the snapshot commit must cover.
    pub snapshot_ratio: f64,
    /// Minimum post-dedup test samples for a project to be usable.
    pub min_test_samples: usize,
    /// Test-sample count from which a project counts as large.
    pub large_project_threshold: usize,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            snapshot_ratio: 0.8,
            min_test_samples: 20,
            large_project_threshold: 100,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.snapshot_ratio > 0.0 && self.snapshot_ratio < 1.0) {
            return Err(Error::Config(format!(
                "snapshot_ratio must be in (0,1), got {}",
                self.snapshot_ratio
            )));
        }
        if self.min_test_samples == 0 {
            return Err(Error::Config("min_test_samples must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Large,
    Small,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

/// One dataset line. Field order is the wire order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub project: String,
    pub split: SplitName,
    pub commit_sha: String,
    pub author_time: i64,
    pub file_path: String,
    pub class_name: String,
    pub name: String,
    pub name_subtokens: Vec<String>,
    /// Comment-free source with the declared name and recursive callees
    /// replaced by the stub token.
    pub masked_source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ast: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_contexts: Option<Vec<(Vec<String>, String, Vec<String>)>>,
}

/// The three partitions of one project plus its classification.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub project: String,
    pub snapshot_sha: String,
    pub train: Vec<DatasetRecord>,
    pub validation: Vec<DatasetRecord>,
    pub test: Vec<DatasetRecord>,
    pub size_class: SizeClass,
    pub rejection_reason: Option<String>,
}

/// Result of picking the snapshot commit and halving what follows it.
#[derive(Debug, Clone)]
pub struct ChronoSplit {
    pub snapshot_sha: String,
    pub snapshot_order_index: usize,
    /// 1-based index of the event that fixed the snapshot: ⌈ratio·N⌉.
    pub snapshot_event_number: usize,
    pub validation: Vec<CreationEventRecord>,
    pub test: Vec<CreationEventRecord>,
}

/// Picks the snapshot commit (the one containing the ⌈ratio·N⌉-th creation)
/// and splits the strictly-later events into validation and test halves.
///
/// The earlier half is validation and takes the odd leftover; a commit's
/// events are never split across the two halves — when the midpoint falls
/// inside a commit, the whole commit goes to validation.
pub fn chronological_split(
    events: &[CreationEventRecord],
    spec: &SplitSpec,
) -> Result<ChronoSplit> {
    let n = events.len();
    if n == 0 {
        return Err(Error::ProjectRejected {
            reason: "no method creation events".into(),
        });
    }
    debug_assert!(events.windows(2).all(|w| w[0].order_index <= w[1].order_index));

    let event_number = (spec.snapshot_ratio * n as f64).ceil() as usize;
    let event_number = event_number.clamp(1, n);
    let snapshot_event = &events[event_number - 1];
    let snapshot_order = snapshot_event.order_index;

    let post: Vec<CreationEventRecord> = events
        .iter()
        .filter(|e| e.order_index > snapshot_order)
        .cloned()
        .collect();
    let m = post.len();
    let mut boundary = m.div_ceil(2);
    while boundary > 0 && boundary < m && post[boundary - 1].order_index == post[boundary].order_index
    {
        boundary += 1;
    }
    let (validation, test) = post.split_at(boundary);
    Ok(ChronoSplit {
        snapshot_sha: snapshot_event.commit_sha.clone(),
        snapshot_order_index: snapshot_order,
        snapshot_event_number: event_number,
        validation: validation.to_vec(),
        test: test.to_vec(),
    })
}

/// Which representations to attach and dedup against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprKind {
    Tokens,
    Ast,
    PathContexts,
}

impl ReprKind {
    pub fn name(&self) -> &'static str {
        match self {
            ReprKind::Tokens => "tokens",
            ReprKind::Ast => "ast",
            ReprKind::PathContexts => "path_contexts",
        }
    }
}

impl std::str::FromStr for ReprKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tokens" => Ok(ReprKind::Tokens),
            "ast" => Ok(ReprKind::Ast),
            "path_contexts" => Ok(ReprKind::PathContexts),
            other => Err(Error::Config(format!(
                "unknown representation {other:?}; expected tokens, ast, or path_contexts"
            ))),
        }
    }
}

/// Everything the builder needs besides the mined inputs.
#[derive(Debug, Clone)]
pub struct DatasetOptions {
    pub project: String,
    pub spec: SplitSpec,
    pub stub: String,
    pub split_options: SplitOptions,
    pub representations: Vec<ReprKind>,
    /// Attach representation fields to emitted records.
    pub emit_representations: bool,
    pub path_params: PathExtractionParams,
}

impl DatasetOptions {
    pub fn new(project: impl Into<String>) -> Self {
        DatasetOptions {
            project: project.into(),
            spec: SplitSpec::default(),
            stub: analysis::DEFAULT_STUB.to_string(),
            split_options: SplitOptions::default(),
            representations: vec![ReprKind::Tokens, ReprKind::Ast, ReprKind::PathContexts],
            emit_representations: true,
            path_params: PathExtractionParams::default(),
        }
    }
}

/// Removal tally of one dedup stage.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DedupEntry {
    pub removed: usize,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DedupReport {
    pub textual: DedupEntry,
    pub per_representation: BTreeMap<String, DedupEntry>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Counts {
    pub events: usize,
    pub post_snapshot_events: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// Sidecar report emitted next to the dataset files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectReport {
    pub project: String,
    pub snapshot_sha: String,
    pub size_class: SizeClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection_reason: Option<String>,
    pub counts: Counts,
    /// Methods dropped per filter reason, over all partitions.
    pub filtered: BTreeMap<String, usize>,
    pub dedup: DedupReport,
}

#[derive(Debug)]
pub struct BuiltDataset {
    pub split: DatasetSplit,
    pub report: ProjectReport,
    pub warnings: Vec<String>,
}

fn record_id(project: &str, commit_sha: &str, key: &crate::miner::MethodKey) -> String {
    let canonical = format!(
        "{project}\u{0}{commit_sha}\u{0}{}\u{0}{}\u{0}{}\u{0}{}",
        key.file_path,
        key.class_name,
        key.method_name,
        key.param_types.join(",")
    );
    normalize::sha256_hex(canonical.as_bytes())[..16].to_string()
}

fn make_record(
    method: &ParsedMethod,
    split: SplitName,
    author_time: i64,
    options: &DatasetOptions,
) -> DatasetRecord {
    let prepared = analysis::prepare_model_input(method, &options.stub);
    let key = &method.snapshot.key;
    let name_subtokens = split_subtokens_with(&key.method_name, options.split_options);
    let (tokens, ast, path_contexts) = if options.emit_representations {
        attach_representations(&prepared, options)
    } else {
        (None, None, None)
    };
    DatasetRecord {
        id: record_id(&options.project, &method.snapshot.commit_sha, key),
        project: options.project.clone(),
        split,
        commit_sha: method.snapshot.commit_sha.clone(),
        author_time,
        file_path: key.file_path.clone(),
        class_name: key.class_name.clone(),
        name: key.method_name.clone(),
        name_subtokens,
        masked_source: prepared.snapshot.body_text.clone(),
        tokens,
        ast,
        path_contexts,
    }
}

type ReprColumns = (
    Option<Vec<String>>,
    Option<String>,
    Option<Vec<(Vec<String>, String, Vec<String>)>>,
);

fn attach_representations(prepared: &ParsedMethod, options: &DatasetOptions) -> ReprColumns {
    let mut tokens = None;
    let mut ast = None;
    let mut paths = None;
    for kind in &options.representations {
        match kind {
            ReprKind::Tokens => {
                tokens = Some(repr::tokenize(prepared).tokens);
            }
            ReprKind::Ast => {
                ast = Some(ast_canonical_string(prepared));
            }
            ReprKind::PathContexts => {
                let contexts = repr::extract_path_contexts(prepared, &options.path_params);
                paths = Some(
                    contexts
                        .into_iter()
                        .map(|c| (c.left, repr::path_string(&c.steps), c.right))
                        .collect(),
                );
            }
        }
    }
    (tokens, ast, paths)
}

/// Canonical string form of the serialized AST: a JSON array of
/// `[kind, token-or-null, child_count]` triples in preorder.
pub fn ast_canonical_string(method: &ParsedMethod) -> String {
    let ast = repr::serialize_ast(method);
    let entries: Vec<(String, Option<String>, usize)> = ast
        .entries
        .into_iter()
        .map(|e| (e.kind, e.token, e.child_count))
        .collect();
    serde_json::to_string(&entries).expect("ast serialization")
}

/// One record per surviving snapshot method, ordered by (path, name,
/// start line).
pub fn build_training(
    snapshot_methods: &[ParsedMethod],
    snapshot_author_time: i64,
    options: &DatasetOptions,
    filtered: &mut BTreeMap<String, usize>,
) -> Vec<DatasetRecord> {
    let mut kept: Vec<&ParsedMethod> = Vec::new();
    for method in snapshot_methods {
        match analysis::keep_method(method) {
            Ok(()) => kept.push(method),
            Err(reason) => {
                *filtered.entry(reason.to_string()).or_insert(0) += 1;
            }
        }
    }
    kept.sort_by(|a, b| {
        (
            &a.snapshot.key.file_path,
            &a.snapshot.key.method_name,
            a.snapshot.start_line,
        )
            .cmp(&(
                &b.snapshot.key.file_path,
                &b.snapshot.key.method_name,
                b.snapshot.start_line,
            ))
    });
    kept.iter()
        .map(|m| make_record(m, SplitName::Train, snapshot_author_time, options))
        .collect()
}

/// Builds validation or test records from creation events: each event body
/// is re-parsed, filtered, and masked like a training method.
pub fn build_eval_records(
    events: &[CreationEventRecord],
    split: SplitName,
    options: &DatasetOptions,
    filtered: &mut BTreeMap<String, usize>,
    warnings: &mut Vec<String>,
) -> Vec<DatasetRecord> {
    let mut records = Vec::new();
    for event in events {
        let Some(mut method) =
            analysis::parse_single_method(&event.body, &event.file_path, &event.class_name)
        else {
            warnings.push(format!(
                "could not re-parse method {} from commit {}; record skipped",
                event.method_name, event.commit_sha
            ));
            continue;
        };
        method.snapshot.commit_sha = event.commit_sha.clone();
        method.snapshot.start_line = event.start_line;
        method.snapshot.end_line = event.end_line;
        match analysis::keep_method(&method) {
            Ok(()) => records.push(make_record(&method, split, event.author_time, options)),
            Err(reason) => {
                *filtered.entry(reason.to_string()).or_insert(0) += 1;
            }
        }
    }
    records
}

/// The textual-dedup identity of a record: its masked source with all
/// whitespace removed, hashed.
pub fn textual_hash(record: &DatasetRecord) -> String {
    normalize::whitespace_free_hash(&record.masked_source)
}

/// Removes validation/test records that are exact normalized-text copies of
/// a training record. Training itself never shrinks.
pub fn dedup_textual(split: &mut DatasetSplit) -> DedupEntry {
    let train_hashes: HashSet<String> = split.train.iter().map(textual_hash).collect();
    let mut entry = DedupEntry::default();
    for partition in [&mut split.validation, &mut split.test] {
        partition.retain(|record| {
            if train_hashes.contains(&textual_hash(record)) {
                entry.ids.push(record.id.clone());
                false
            } else {
                true
            }
        });
    }
    entry.removed = entry.ids.len();
    entry
}

/// Computes the fingerprint of one record under one representation by
/// re-parsing its masked source. `None` when the source cannot be re-parsed.
pub fn record_fingerprint(
    record: &DatasetRecord,
    kind: ReprKind,
    path_params: &PathExtractionParams,
) -> Option<String> {
    let method =
        analysis::parse_single_method(&record.masked_source, &record.file_path, &record.class_name)?;
    let representation = match kind {
        ReprKind::Tokens => Representation::Tokens(repr::tokenize(&method)),
        ReprKind::Ast => Representation::Ast(repr::serialize_ast(&method)),
        ReprKind::PathContexts => {
            Representation::PathContexts(repr::extract_path_contexts(&method, path_params))
        }
    };
    Some(repr::representation_fingerprint(&representation))
}

/// Removes validation/test records that collide with a training record on
/// (method name, representation fingerprint). Records whose representation
/// cannot be extracted are kept, with a warning.
pub fn dedup_representation(
    split: &mut DatasetSplit,
    representation: &str,
    fingerprint: impl Fn(&DatasetRecord) -> Option<String>,
    warnings: &mut Vec<String>,
) -> DedupEntry {
    let mut train_prints: HashSet<(String, String)> = HashSet::new();
    for record in &split.train {
        match fingerprint(record) {
            Some(print) => {
                train_prints.insert((record.name.clone(), print));
            }
            None => warnings.push(format!(
                "no {representation} representation for training record {}",
                record.id
            )),
        }
    }
    let mut entry = DedupEntry::default();
    for partition in [&mut split.validation, &mut split.test] {
        partition.retain(|record| match fingerprint(record) {
            Some(print) => {
                if train_prints.contains(&(record.name.clone(), print)) {
                    entry.ids.push(record.id.clone());
                    false
                } else {
                    true
                }
            }
            None => {
                warnings.push(format!(
                    "no {representation} representation for record {}; kept",
                    record.id
                ));
                true
            }
        });
    }
    entry.removed = entry.ids.len();
    entry
}

/// Classifies a project by its post-dedup test-sample count.
pub fn validate_project(split: &DatasetSplit, spec: &SplitSpec) -> SizeClass {
    let tests = split.test.len();
    if tests < spec.min_test_samples {
        SizeClass::Rejected
    } else if tests >= spec.large_project_threshold {
        SizeClass::Large
    } else {
        SizeClass::Small
    }
}

/// Runs the whole dataset build for one project: split, records, dedup,
/// validation. A rejected project comes back with `SizeClass::Rejected`
/// and a reason instead of an error.
pub fn build_dataset(
    events: &[CreationEventRecord],
    snapshot_methods: &[ParsedMethod],
    snapshot_sha: &str,
    snapshot_author_time: i64,
    options: &DatasetOptions,
) -> Result<BuiltDataset> {
    options.spec.validate()?;
    let mut warnings = Vec::new();
    let mut filtered = BTreeMap::new();

    let chrono = match chronological_split(events, &options.spec) {
        Ok(chrono) => chrono,
        Err(Error::ProjectRejected { reason }) => {
            return Ok(rejected_dataset(events, options, reason));
        }
        Err(other) => return Err(other),
    };
    debug_assert_eq!(chrono.snapshot_sha, snapshot_sha);

    let train = build_training(snapshot_methods, snapshot_author_time, options, &mut filtered);
    let validation = build_eval_records(
        &chrono.validation,
        SplitName::Validation,
        options,
        &mut filtered,
        &mut warnings,
    );
    let test = build_eval_records(
        &chrono.test,
        SplitName::Test,
        options,
        &mut filtered,
        &mut warnings,
    );

    let mut split = DatasetSplit {
        project: options.project.clone(),
        snapshot_sha: snapshot_sha.to_string(),
        train,
        validation,
        test,
        size_class: SizeClass::Rejected,
        rejection_reason: None,
    };

    let mut dedup = DedupReport {
        textual: dedup_textual(&mut split),
        per_representation: BTreeMap::new(),
    };
    for kind in &options.representations {
        let entry = dedup_representation(
            &mut split,
            kind.name(),
            |record| record_fingerprint(record, *kind, &options.path_params),
            &mut warnings,
        );
        dedup.per_representation.insert(kind.name().to_string(), entry);
    }

    split.size_class = validate_project(&split, &options.spec);
    if split.size_class == SizeClass::Rejected {
        split.rejection_reason = Some(format!(
            "{} test samples after dedup, need at least {}",
            split.test.len(),
            options.spec.min_test_samples
        ));
    }

    let report = ProjectReport {
        project: options.project.clone(),
        snapshot_sha: split.snapshot_sha.clone(),
        size_class: split.size_class,
        rejection_reason: split.rejection_reason.clone(),
        counts: Counts {
            events: events.len(),
            post_snapshot_events: chrono.validation.len() + chrono.test.len(),
            train: split.train.len(),
            validation: split.validation.len(),
            test: split.test.len(),
        },
        filtered,
        dedup,
    };
    Ok(BuiltDataset {
        split,
        report,
        warnings,
    })
}

fn rejected_dataset(
    events: &[CreationEventRecord],
    options: &DatasetOptions,
    reason: String,
) -> BuiltDataset {
    let split = DatasetSplit {
        project: options.project.clone(),
        snapshot_sha: String::new(),
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        size_class: SizeClass::Rejected,
        rejection_reason: Some(reason.clone()),
    };
    let report = ProjectReport {
        project: options.project.clone(),
        snapshot_sha: String::new(),
        size_class: SizeClass::Rejected,
        rejection_reason: Some(reason),
        counts: Counts {
            events: events.len(),
            ..Counts::default()
        },
        filtered: BTreeMap::new(),
        dedup: DedupReport::default(),
    };
    BuiltDataset {
        split,
        report,
        warnings: Vec::new(),
    }
}

/// Writes the dataset files for one project. Rejected projects get the
/// report only.
pub fn write_dataset(built: &BuiltDataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_json(&dir.join("report.json"), &built.report)?;
    if built.split.size_class == SizeClass::Rejected {
        return Ok(());
    }
    io::write_jsonl(&dir.join("train.jsonl"), &built.split.train)?;
    io::write_jsonl(&dir.join("validation.jsonl"), &built.split.validation)?;
    io::write_jsonl(&dir.join("test.jsonl"), &built.split.test)?;
    Ok(())
}
