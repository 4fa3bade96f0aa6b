//! Owned syntax tree detached from the tree-sitter arena, plus span-based
//! edits that keep tree and source text consistent.

/// One node of a method's syntax tree. Leaves carry the source token,
/// interior nodes only the node type. Byte offsets are relative to the start
/// of the method text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxNode {
    pub kind: String,
    pub start: usize,
    pub end: usize,
    pub token: Option<String>,
    pub children: Vec<SyntaxNode>,
}

impl SyntaxNode {
    /// Converts a tree-sitter node into an owned tree, rebasing byte offsets
    /// onto `base`.
    pub fn from_ts(node: tree_sitter::Node<'_>, source: &[u8], base: usize) -> SyntaxNode {
        let child_count = node.child_count();
        let token = if child_count == 0 {
            Some(
                std::str::from_utf8(&source[node.start_byte()..node.end_byte()])
                    .unwrap_or("")
                    .to_string(),
            )
        } else {
            None
        };
        let mut children = Vec::with_capacity(child_count);
        for i in 0..child_count {
            children.push(SyntaxNode::from_ts(node.child(i as u32).unwrap(), source, base));
        }
        SyntaxNode {
            kind: node.kind().to_string(),
            start: node.start_byte() - base,
            end: node.end_byte() - base,
            token,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn is_comment(&self) -> bool {
        matches!(self.kind.as_str(), "line_comment" | "block_comment")
    }

    /// Depth-first, left-to-right visit of every node.
    pub fn walk(&self, visit: &mut impl FnMut(&SyntaxNode)) {
        visit(self);
        for child in &self.children {
            child.walk(visit);
        }
    }

    /// All leaves in source order.
    pub fn leaves(&self) -> Vec<&SyntaxNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a SyntaxNode>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for child in &self.children {
                child.collect_leaves(out);
            }
        }
    }

    /// Structural equality ignoring byte spans; used to compare trees whose
    /// surrounding context differs.
    pub fn same_shape(&self, other: &SyntaxNode) -> bool {
        self.kind == other.kind
            && self.token == other.token
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.same_shape(b))
    }
}

/// A single span edit. `replacement: None` deletes every node fully covered
/// by the span (used for comments); `Some(text)` must cover exactly one leaf
/// and swaps its token (used for name stubs).
#[derive(Debug, Clone)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: Option<String>,
}

/// Applies non-overlapping edits (sorted by start) to the method text.
pub fn apply_edits_to_text(text: &str, edits: &[Edit]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for edit in edits {
        debug_assert!(edit.start >= pos && edit.end <= text.len());
        out.push_str(&text[pos..edit.start]);
        if let Some(replacement) = &edit.replacement {
            out.push_str(replacement);
        }
        pos = edit.end;
    }
    out.push_str(&text[pos..]);
    out
}

/// Maps original byte offsets to post-edit offsets.
pub struct OffsetMap<'a> {
    edits: &'a [Edit],
}

impl<'a> OffsetMap<'a> {
    pub fn new(edits: &'a [Edit]) -> Self {
        OffsetMap { edits }
    }

    /// New offset of an original position; valid for positions outside any
    /// edited span or at a span boundary.
    pub fn map(&self, pos: usize) -> usize {
        let mut delta: isize = 0;
        for edit in self.edits {
            if edit.end <= pos {
                let inserted = edit.replacement.as_ref().map_or(0, String::len) as isize;
                delta += inserted - (edit.end - edit.start) as isize;
            } else {
                break;
            }
        }
        (pos as isize + delta) as usize
    }
}

impl SyntaxNode {
    /// Rebuilds the tree with the given edits applied: covered nodes are
    /// dropped, replaced leaves get the new token, all spans are remapped.
    pub fn with_edits(&self, edits: &[Edit]) -> Option<SyntaxNode> {
        let map = OffsetMap::new(edits);
        self.rebuild(edits, &map)
    }

    fn rebuild(&self, edits: &[Edit], map: &OffsetMap<'_>) -> Option<SyntaxNode> {
        for edit in edits {
            if edit.replacement.is_none() && edit.start <= self.start && self.end <= edit.end {
                return None;
            }
        }
        let new_start = map.map(self.start);
        if self.is_leaf() {
            for edit in edits {
                if let Some(replacement) = &edit.replacement {
                    if edit.start == self.start && edit.end == self.end {
                        return Some(SyntaxNode {
                            kind: self.kind.clone(),
                            start: new_start,
                            end: new_start + replacement.len(),
                            token: Some(replacement.clone()),
                            children: Vec::new(),
                        });
                    }
                }
            }
            return Some(SyntaxNode {
                kind: self.kind.clone(),
                start: new_start,
                end: map.map(self.end),
                token: self.token.clone(),
                children: Vec::new(),
            });
        }
        let children: Vec<SyntaxNode> = self
            .children
            .iter()
            .filter_map(|c| c.rebuild(edits, map))
            .collect();
        Some(SyntaxNode {
            kind: self.kind.clone(),
            start: new_start,
            end: map.map(self.end),
            token: None,
            children,
        })
    }
}

/// Sorts edits by start offset and checks they do not overlap.
pub fn normalize_edits(mut edits: Vec<Edit>) -> Vec<Edit> {
    edits.sort_by_key(|e| (e.start, e.end));
    for pair in edits.windows(2) {
        debug_assert!(
            pair[0].end <= pair[1].start,
            "overlapping edits: {pair:?}"
        );
    }
    edits
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(kind: &str, start: usize, end: usize, token: &str) -> SyntaxNode {
        SyntaxNode {
            kind: kind.into(),
            start,
            end,
            token: Some(token.into()),
            children: vec![],
        }
    }

    #[test]
    fn text_edits_splice_and_replace() {
        let text = "int foo() { /*c*/ return 1; }";
        let edits = vec![
            Edit {
                start: 4,
                end: 7,
                replacement: Some("STUB".into()),
            },
            Edit {
                start: 12,
                end: 17,
                replacement: None,
            },
        ];
        assert_eq!(apply_edits_to_text(text, &edits), "int STUB() {  return 1; }");
    }

    #[test]
    fn tree_edit_drops_covered_node_and_remaps_spans() {
        // root over [a][comment][b]
        let root = SyntaxNode {
            kind: "root".into(),
            start: 0,
            end: 11,
            token: None,
            children: vec![
                leaf("identifier", 0, 3, "foo"),
                leaf("line_comment", 3, 8, "// x "),
                leaf("identifier", 8, 11, "bar"),
            ],
        };
        let edits = vec![Edit {
            start: 3,
            end: 8,
            replacement: None,
        }];
        let edited = root.with_edits(&edits).unwrap();
        assert_eq!(edited.children.len(), 2);
        assert_eq!(edited.children[1].start, 3);
        assert_eq!(edited.children[1].end, 6);
        assert_eq!(edited.end, 6);
    }

    #[test]
    fn tree_edit_replaces_leaf_token() {
        let root = leaf("identifier", 2, 5, "foo");
        let edits = vec![Edit {
            start: 2,
            end: 5,
            replacement: Some("LONGERNAME".into()),
        }];
        let edited = root.with_edits(&edits).unwrap();
        assert_eq!(edited.token.as_deref(), Some("LONGERNAME"));
        assert_eq!((edited.start, edited.end), (2, 12));
    }
}
