//! Body normalization for duplicate detection and rename matching.
//!
//! The normalized form of a method drops every comment, removes all
//! whitespace (including whitespace inside string literals), and replaces
//! the declared method name with a placeholder so that a pure rename leaves
//! the normalized form unchanged.

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};

use super::ParsedMethod;

/// Placeholder standing in for the declared name in normalized bodies.
const NAME_PLACEHOLDER: char = '\u{1}';

/// Normalized body text of a parsed method.
pub fn normalized_body(method: &ParsedMethod) -> String {
    let mut out = String::with_capacity(method.snapshot.body_text.len());
    let (name_start, name_end) = method.name_span;
    for leaf in method.tree.leaves() {
        if leaf.is_comment() {
            continue;
        }
        if leaf.start == name_start && leaf.end == name_end {
            out.push(NAME_PLACEHOLDER);
            continue;
        }
        if let Some(token) = &leaf.token {
            out.extend(token.chars().filter(|c| !c.is_whitespace()));
        }
    }
    out
}

/// Hash of the normalized body; the identity used for exact-body rename
/// links and textual deduplication.
pub fn body_hash(method: &ParsedMethod) -> String {
    sha256_hex(normalized_body(method).as_bytes())
}

/// Distinct lexer tokens of the comment-free body, excluding the declared
/// name itself. Input to the Jaccard similarity used for fuzzy rename
/// detection.
pub fn normalized_token_set(method: &ParsedMethod) -> BTreeSet<String> {
    let (name_start, name_end) = method.name_span;
    let mut tokens = BTreeSet::new();
    for leaf in method.tree.leaves() {
        if leaf.is_comment() || (leaf.start == name_start && leaf.end == name_end) {
            continue;
        }
        if let Some(token) = &leaf.token {
            if !token.is_empty() {
                tokens.insert(token.clone());
            }
        }
    }
    tokens
}

/// Hash of a text with every whitespace character removed; the textual-dedup
/// identity of emitted (already comment-free, name-masked) record sources.
pub fn whitespace_free_hash(text: &str) -> String {
    let squeezed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    sha256_hex(squeezed.as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
