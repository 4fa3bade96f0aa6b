//! Model-facing code representations: token sequences, serialized ASTs, and
//! path contexts, plus the stable fingerprints used for representation-level
//! deduplication.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::analysis::{normalize, ParsedMethod, SyntaxNode};
use crate::subtokens::split_subtokens;

/// Lexer tokens of a masked, comment-free method, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

/// One node of a preorder AST serialization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstEntry {
    pub kind: String,
    pub token: Option<String>,
    pub child_count: usize,
}

/// Preorder serialization; child counts make the tree uniquely
/// reconstructible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerializedAst {
    pub entries: Vec<AstEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub kind: String,
    pub direction: Direction,
}

/// Two leaf tokens and the node types along the tree path between them.
/// The path runs upward to the lowest common ancestor, then downward; both
/// leaves themselves are excluded from the steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathContext {
    pub left: Vec<String>,
    pub steps: Vec<PathStep>,
    pub right: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PathExtractionParams {
    /// Upper bound on the number of nodes in a path.
    pub max_path_length: usize,
    /// Upper bound on the leaf-index distance between the two endpoints.
    pub max_path_width: usize,
    /// Cap on contexts per method; above it, contexts are sampled.
    pub max_contexts: usize,
    pub sampling_seed: u64,
}

impl Default for PathExtractionParams {
    fn default() -> Self {
        PathExtractionParams {
            max_path_length: 9,
            max_path_width: 2,
            max_contexts: 200,
            sampling_seed: 0,
        }
    }
}

/// Lexer tokens in source order; comments never appear (and whitespace is
/// not a token to begin with).
pub fn tokenize(method: &ParsedMethod) -> TokenSequence {
    let tokens = method
        .tree
        .leaves()
        .into_iter()
        .filter(|leaf| !leaf.is_comment())
        .filter_map(|leaf| leaf.token.clone())
        .filter(|t| !t.is_empty())
        .collect();
    TokenSequence { tokens }
}

/// Deterministic preorder serialization of the method tree.
pub fn serialize_ast(method: &ParsedMethod) -> SerializedAst {
    let mut entries = Vec::new();
    method.tree.walk(&mut |node| {
        entries.push(AstEntry {
            kind: node.kind.clone(),
            token: node.token.clone(),
            child_count: node.children.len(),
        });
    });
    SerializedAst { entries }
}

/// Rebuilds the tree from its preorder serialization. Returns `None` on a
/// malformed entry list. Spans are zeroed; compare with
/// [`SyntaxNode::same_shape`].
pub fn reconstruct_ast(ast: &SerializedAst) -> Option<SyntaxNode> {
    let mut pos = 0;
    let root = reconstruct_at(&ast.entries, &mut pos)?;
    if pos == ast.entries.len() {
        Some(root)
    } else {
        None
    }
}

fn reconstruct_at(entries: &[AstEntry], pos: &mut usize) -> Option<SyntaxNode> {
    let entry = entries.get(*pos)?.clone();
    *pos += 1;
    let mut children = Vec::with_capacity(entry.child_count);
    for _ in 0..entry.child_count {
        children.push(reconstruct_at(entries, pos)?);
    }
    Some(SyntaxNode {
        kind: entry.kind,
        start: 0,
        end: 0,
        token: entry.token,
        children,
    })
}

/// Flat view of the tree with parent pointers, for path walking.
struct Arena<'t> {
    nodes: Vec<(&'t SyntaxNode, Option<usize>)>,
    leaves: Vec<usize>,
}

impl<'t> Arena<'t> {
    fn build(root: &'t SyntaxNode) -> Self {
        let mut arena = Arena {
            nodes: Vec::new(),
            leaves: Vec::new(),
        };
        arena.push(root, None);
        arena
    }

    fn push(&mut self, node: &'t SyntaxNode, parent: Option<usize>) {
        let idx = self.nodes.len();
        self.nodes.push((node, parent));
        if node.is_leaf() {
            if !node.is_comment() && node.token.as_deref().is_some_and(|t| !t.is_empty()) {
                self.leaves.push(idx);
            }
        } else {
            for child in &node.children {
                self.push(child, Some(idx));
            }
        }
    }

    fn ancestors(&self, mut idx: usize) -> Vec<usize> {
        let mut chain = Vec::new();
        while let Some(parent) = self.nodes[idx].1 {
            chain.push(parent);
            idx = parent;
        }
        chain
    }

    /// Steps from one leaf to another: up to the lowest common ancestor
    /// (inclusive), then down to the other leaf's parent.
    fn path_between(&self, left: usize, right: usize) -> Vec<PathStep> {
        let up_chain = self.ancestors(left);
        let down_chain = self.ancestors(right);
        let on_up: std::collections::HashMap<usize, usize> = up_chain
            .iter()
            .enumerate()
            .map(|(depth, &node)| (node, depth))
            .collect();
        let mut lca_pos_up = up_chain.len() - 1;
        let mut below_lca = Vec::new();
        for &node in &down_chain {
            if let Some(&depth) = on_up.get(&node) {
                lca_pos_up = depth;
                break;
            }
            below_lca.push(node);
        }
        let mut steps = Vec::new();
        for &node in &up_chain[..=lca_pos_up] {
            steps.push(PathStep {
                kind: self.nodes[node].0.kind.clone(),
                direction: Direction::Up,
            });
        }
        for &node in below_lca.iter().rev() {
            steps.push(PathStep {
                kind: self.nodes[node].0.kind.clone(),
                direction: Direction::Down,
            });
        }
        steps
    }
}

/// Enumerates leaf pairs `(i, j)` with `j - i <= max_path_width` whose
/// connecting path has at most `max_path_length` nodes. When more than
/// `max_contexts` survive, a seeded uniform sample without replacement is
/// taken; output order is by `(i, j)` either way.
pub fn extract_path_contexts(
    method: &ParsedMethod,
    params: &PathExtractionParams,
) -> Vec<PathContext> {
    let arena = Arena::build(&method.tree);
    let leaves = &arena.leaves;
    let mut found: Vec<(usize, usize, Vec<PathStep>)> = Vec::new();
    for i in 0..leaves.len() {
        let upper = (i + params.max_path_width).min(leaves.len().saturating_sub(1));
        for j in (i + 1)..=upper {
            let steps = arena.path_between(leaves[i], leaves[j]);
            if steps.len() <= params.max_path_length {
                found.push((i, j, steps));
            }
        }
    }

    let selected: Vec<(usize, usize, Vec<PathStep>)> = if found.len() > params.max_contexts {
        let picks = sample_indices(found.len(), params.max_contexts, params.sampling_seed);
        picks.into_iter().map(|k| found[k].clone()).collect()
    } else {
        found
    };

    selected
        .into_iter()
        .map(|(i, j, steps)| {
            let left_token = arena.nodes[leaves[i]].0.token.as_deref().unwrap_or("");
            let right_token = arena.nodes[leaves[j]].0.token.as_deref().unwrap_or("");
            PathContext {
                left: split_subtokens(left_token),
                steps,
                right: split_subtokens(right_token),
            }
        })
        .collect()
}

/// Uniform sample without replacement via a partial Fisher-Yates shuffle;
/// returns sorted indices so downstream order stays by `(i, j)`.
fn sample_indices(total: usize, amount: usize, seed: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..amount {
        let j = i + (rng.next_u64() as usize) % (total - i);
        pool.swap(i, j);
    }
    pool.truncate(amount);
    pool.sort_unstable();
    pool
}

/// Renders path steps as a single string: `^` marks an up-step, `v` a
/// down-step, steps are space-separated.
pub fn path_string(steps: &[PathStep]) -> String {
    steps
        .iter()
        .map(|s| {
            let mark = match s.direction {
                Direction::Up => '^',
                Direction::Down => 'v',
            };
            format!("{mark}{}", s.kind)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A representation value ready for fingerprinting or emission.
#[derive(Debug, Clone)]
pub enum Representation {
    Tokens(TokenSequence),
    Ast(SerializedAst),
    PathContexts(Vec<PathContext>),
}

/// The canonical byte form behind fingerprints. Strings are length-prefixed
/// so the encoding is injective; representations are domain-separated by a
/// leading tag line.
pub fn canonical_bytes(representation: &Representation) -> Vec<u8> {
    let mut out = Vec::new();
    match representation {
        Representation::Tokens(seq) => {
            out.extend_from_slice(b"tokens\n");
            for token in &seq.tokens {
                push_string(&mut out, token);
                out.push(b'\n');
            }
        }
        Representation::Ast(ast) => {
            out.extend_from_slice(b"ast\n");
            for entry in &ast.entries {
                push_string(&mut out, &entry.kind);
                out.extend_from_slice(format!("|{}|", entry.child_count).as_bytes());
                match &entry.token {
                    Some(token) => push_string(&mut out, token),
                    None => out.push(b'-'),
                }
                out.push(b'\n');
            }
        }
        Representation::PathContexts(contexts) => {
            out.extend_from_slice(b"paths\n");
            for context in contexts {
                for token in &context.left {
                    push_string(&mut out, token);
                }
                out.push(b';');
                push_string(&mut out, &path_string(&context.steps));
                out.push(b';');
                for token in &context.right {
                    push_string(&mut out, token);
                }
                out.push(b'\n');
            }
        }
    }
    out
}

fn push_string(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(format!("{}:", s.len()).as_bytes());
    out.extend_from_slice(s.as_bytes());
}

/// SHA-256 over the canonical bytes: equal representations get equal
/// fingerprints, and the 256-bit width makes collisions negligible.
pub fn representation_fingerprint(representation: &Representation) -> String {
    normalize::sha256_hex(&canonical_bytes(representation))
}
