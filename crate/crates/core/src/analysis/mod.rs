//! Java source analysis: method extraction, filtering, comment stripping,
//! and recursion masking.
//!
//! Parsing is grammar-based (tree-sitter) and deterministic: the same input
//! bytes always produce the same tree. All functions here are pure over
//! immutable inputs and safe for data-parallel use across files.

pub mod normalize;
pub mod tree;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashSet};

use tree_sitter::Parser;

pub use tree::{Edit, SyntaxNode};

use crate::miner::{MethodKey, MethodSnapshot};

/// Replacement token for masked method names. Deliberately a single
/// uppercase run so the sub-token splitter cannot break it apart.
pub const DEFAULT_STUB: &str = "METHODNAMESTUB";

/// A method or constructor declaration with its syntax tree and the
/// modifier/annotation facts the filters need.
#[derive(Debug, Clone)]
pub struct ParsedMethod {
    pub snapshot: MethodSnapshot,
    /// Method subtree; byte offsets relative to the method start.
    pub tree: SyntaxNode,
    /// Byte range of the declared name, relative to the method start.
    pub name_span: (usize, usize),
    pub modifiers: BTreeSet<String>,
    /// Simple annotation names (`Override`, not `java.lang.Override`).
    pub annotations: BTreeSet<String>,
    pub is_constructor: bool,
    pub has_body: bool,
}

/// Result of parsing one source file.
#[derive(Debug, Default)]
pub struct FileParse {
    pub methods: Vec<ParsedMethod>,
    pub warnings: Vec<String>,
}

thread_local! {
    static PARSER: RefCell<Parser> = RefCell::new(new_parser());
}

fn new_parser() -> Parser {
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("java grammar");
    parser
}

fn parse_tree(text: &str) -> Option<tree_sitter::Tree> {
    PARSER.with(|parser| parser.borrow_mut().parse(text, None))
}

/// Extracts every method and constructor declaration from a source file.
///
/// Nested and local classes contribute methods with qualified class names;
/// methods of anonymous classes and enum-constant bodies are skipped (they
/// have no class identity to key on). Files with syntax errors yield the
/// methods recoverable from valid subtrees plus a warning.
pub fn parse_methods(file_text: &str, file_path: &str) -> FileParse {
    let Some(ts_tree) = parse_tree(file_text) else {
        return FileParse {
            methods: Vec::new(),
            warnings: vec![format!("parser produced no tree for {file_path}")],
        };
    };
    let root = ts_tree.root_node();
    let mut warnings = Vec::new();
    if root.has_error() {
        warnings.push(format!(
            "syntax errors in {file_path}; extracting methods from valid subtrees"
        ));
    }
    let package = package_name(root, file_text);

    let mut nodes = Vec::new();
    collect_method_nodes(root, &mut nodes);

    let mut methods = Vec::new();
    let mut seen: HashSet<MethodKey> = HashSet::new();
    for node in nodes {
        let Some(method) = build_method(node, file_text, file_path, &package) else {
            continue;
        };
        if seen.insert(method.snapshot.key.clone()) {
            methods.push(method);
        } else {
            warnings.push(format!(
                "duplicate method {} in {file_path}; keeping the first occurrence",
                method.snapshot.key
            ));
        }
    }
    FileParse { methods, warnings }
}

fn collect_method_nodes<'t>(node: tree_sitter::Node<'t>, out: &mut Vec<tree_sitter::Node<'t>>) {
    if matches!(node.kind(), "method_declaration" | "constructor_declaration") {
        out.push(node);
    }
    for i in 0..node.child_count() {
        collect_method_nodes(node.child(i as u32).unwrap(), out);
    }
}

fn package_name(root: tree_sitter::Node<'_>, src: &str) -> String {
    for i in 0..root.child_count() {
        let child = root.child(i as u32).unwrap();
        if child.kind() == "package_declaration" {
            for j in 0..child.child_count() {
                let part = child.child(j as u32).unwrap();
                if matches!(part.kind(), "identifier" | "scoped_identifier") {
                    return node_text(part, src).to_string();
                }
            }
        }
    }
    String::new()
}

fn node_text<'s>(node: tree_sitter::Node<'_>, src: &'s str) -> &'s str {
    &src[node.byte_range()]
}

fn build_method(
    node: tree_sitter::Node<'_>,
    src: &str,
    file_path: &str,
    package: &str,
) -> Option<ParsedMethod> {
    let mut chain = Vec::new();
    let mut current = node.parent();
    while let Some(ancestor) = current {
        match ancestor.kind() {
            "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "record_declaration"
            | "annotation_type_declaration" => {
                let name = ancestor.child_by_field_name("name")?;
                chain.push(node_text(name, src));
            }
            // Anonymous classes have no stable identity.
            "object_creation_expression" | "enum_constant" => return None,
            _ => {}
        }
        current = ancestor.parent();
    }
    if chain.is_empty() {
        return None;
    }
    chain.reverse();
    let class_name = if package.is_empty() {
        chain.join(".")
    } else {
        format!("{package}.{}", chain.join("."))
    };

    let name_node = node.child_by_field_name("name")?;
    let method_name = node_text(name_node, src).to_string();
    let param_types = param_types(node.child_by_field_name("parameters")?, src);

    let mut modifiers = BTreeSet::new();
    let mut annotations = BTreeSet::new();
    for i in 0..node.child_count() {
        let child = node.child(i as u32).unwrap();
        if child.kind() != "modifiers" {
            continue;
        }
        for j in 0..child.child_count() {
            let item = child.child(j as u32).unwrap();
            match item.kind() {
                "marker_annotation" | "annotation" => {
                    if let Some(name) = annotation_simple_name(item, src) {
                        annotations.insert(name);
                    }
                }
                _ => {
                    modifiers.insert(node_text(item, src).to_string());
                }
            }
        }
    }

    let base = node.start_byte();
    let body_text = node_text(node, src).to_string();
    let tree = SyntaxNode::from_ts(node, src.as_bytes(), base);
    let name_span = (name_node.start_byte() - base, name_node.end_byte() - base);

    let mut method = ParsedMethod {
        snapshot: MethodSnapshot {
            key: MethodKey {
                file_path: file_path.to_string(),
                class_name,
                method_name,
                param_types,
            },
            body_text,
            body_hash: String::new(),
            commit_sha: String::new(),
            start_line: node.start_position().row as u32 + 1,
            end_line: node.end_position().row as u32 + 1,
        },
        tree,
        name_span,
        modifiers,
        annotations,
        is_constructor: node.kind() == "constructor_declaration",
        has_body: node.child_by_field_name("body").is_some(),
    };
    method.snapshot.body_hash = normalize::body_hash(&method);
    Some(method)
}

fn param_types(params: tree_sitter::Node<'_>, src: &str) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..params.child_count() {
        let param = params.child(i as u32).unwrap();
        match param.kind() {
            "formal_parameter" => {
                let Some(ty) = param.child_by_field_name("type") else {
                    continue;
                };
                let mut text = squeeze(node_text(ty, src));
                if let Some(dims) = param.child_by_field_name("dimensions") {
                    text.push_str(&squeeze(node_text(dims, src)));
                }
                out.push(text);
            }
            "spread_parameter" => {
                // Children: (modifiers)? type "..." declarator.
                let mut ty = None;
                for j in 0..param.child_count() {
                    let child = param.child(j as u32).unwrap();
                    if node_text(child, src) == "..." {
                        break;
                    }
                    if child.kind() != "modifiers" {
                        ty = Some(child);
                    }
                }
                if let Some(ty) = ty {
                    out.push(format!("{}...", squeeze(node_text(ty, src))));
                }
            }
            _ => {}
        }
    }
    out
}

fn squeeze(text: &str) -> String {
    text.chars().filter(|c| !c.is_whitespace()).collect()
}

fn annotation_simple_name(node: tree_sitter::Node<'_>, src: &str) -> Option<String> {
    let name = node.child_by_field_name("name")?;
    let text = node_text(name, src);
    Some(text.rsplit('.').next().unwrap_or(text).to_string())
}

/// Re-parses an extracted method body, wrapping it in a class named after
/// the simple class name so that own-class-qualified recursive calls mask
/// the same way they did in the original file.
pub fn parse_single_method(
    body_text: &str,
    file_path: &str,
    class_name: &str,
) -> Option<ParsedMethod> {
    let simple = class_name
        .rsplit('.')
        .next()
        .filter(|s| !s.is_empty())
        .unwrap_or("C");
    let wrapper = format!("class {simple} {{\n{body_text}\n}}\n");
    let parse = parse_methods(&wrapper, file_path);
    let mut method = parse.methods.into_iter().next()?;
    method.snapshot.key.class_name = class_name.to_string();
    Some(method)
}

fn apply_edits(method: &ParsedMethod, edits: Vec<Edit>) -> ParsedMethod {
    let edits = tree::normalize_edits(edits);
    if edits.is_empty() {
        return method.clone();
    }
    let body_text = tree::apply_edits_to_text(&method.snapshot.body_text, &edits);
    let new_tree = method
        .tree
        .with_edits(&edits)
        .expect("method root is never fully deleted");
    let map = tree::OffsetMap::new(&edits);
    let name_span = (map.map(method.name_span.0), map.map(method.name_span.1));

    let mut out = ParsedMethod {
        snapshot: MethodSnapshot {
            body_text,
            body_hash: String::new(),
            ..method.snapshot.clone()
        },
        tree: new_tree,
        name_span,
        modifiers: method.modifiers.clone(),
        annotations: method.annotations.clone(),
        is_constructor: method.is_constructor,
        has_body: method.has_body,
    };
    out.snapshot.body_hash = normalize::body_hash(&out);
    out
}

/// Removes every line, block, and documentation comment from the method
/// text and tree. Idempotent; code semantics untouched.
pub fn strip_comments(method: &ParsedMethod) -> ParsedMethod {
    let mut edits = Vec::new();
    method.tree.walk(&mut |node| {
        if node.is_comment() {
            edits.push(Edit {
                start: node.start,
                end: node.end,
                replacement: None,
            });
        }
    });
    apply_edits(method, edits)
}

/// Replaces the callee of every recursive call (bare, `this.`-qualified, or
/// own-class-qualified) and the declaration-site name with `stub`.
/// Idempotent: already-masked occurrences no longer match the method name.
pub fn mask_recursion(method: &ParsedMethod, stub: &str) -> ParsedMethod {
    let name = method.snapshot.key.method_name.as_str();
    let simple_class = method
        .snapshot
        .key
        .class_name
        .rsplit('.')
        .next()
        .unwrap_or("");
    let mut edits = Vec::new();

    method.tree.walk(&mut |node| {
        if node.kind != "method_invocation" {
            return;
        }
        let Some((callee_index, callee)) = invocation_callee(node) else {
            return;
        };
        if callee.token.as_deref() != Some(name) {
            return;
        }
        let masked = if callee_index == 0 {
            true // bare recursive call
        } else {
            match node.children.first() {
                Some(receiver) if receiver.kind == "this" => true,
                Some(receiver) => {
                    receiver.kind == "identifier"
                        && receiver.token.as_deref() == Some(simple_class)
                }
                None => false,
            }
        };
        if masked {
            edits.push(Edit {
                start: callee.start,
                end: callee.end,
                replacement: Some(stub.to_string()),
            });
        }
    });

    // Declaration site, unless a previous pass already stubbed it.
    if let Some(decl) = find_leaf_at(&method.tree, method.name_span) {
        if decl.token.as_deref() == Some(name) {
            edits.push(Edit {
                start: method.name_span.0,
                end: method.name_span.1,
                replacement: Some(stub.to_string()),
            });
        }
    }
    apply_edits(method, edits)
}

fn invocation_callee(node: &SyntaxNode) -> Option<(usize, &SyntaxNode)> {
    let args = node
        .children
        .iter()
        .position(|c| c.kind == "argument_list")?;
    let callee_index = (0..args).rev().find(|&i| node.children[i].kind == "identifier")?;
    Some((callee_index, &node.children[callee_index]))
}

fn find_leaf_at(tree: &SyntaxNode, span: (usize, usize)) -> Option<&SyntaxNode> {
    let mut found = None;
    find_leaf_at_impl(tree, span, &mut found);
    found
}

fn find_leaf_at_impl<'t>(
    node: &'t SyntaxNode,
    span: (usize, usize),
    found: &mut Option<&'t SyntaxNode>,
) {
    if found.is_some() || node.end < span.1 || node.start > span.0 {
        return;
    }
    if node.is_leaf() {
        if node.start == span.0 && node.end == span.1 {
            *found = Some(node);
        }
        return;
    }
    for child in &node.children {
        find_leaf_at_impl(child, span, found);
    }
}

/// Comment stripping followed by recursion masking: the transformation
/// applied to every emitted model input.
pub fn prepare_model_input(method: &ParsedMethod, stub: &str) -> ParsedMethod {
    mask_recursion(&strip_comments(method), stub)
}

/// Why a method was dropped from the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RejectReason {
    Constructor,
    Abstract,
    Overridden,
    Empty,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectReason::Constructor => "constructor",
            RejectReason::Abstract => "abstract",
            RejectReason::Overridden => "overridden",
            RejectReason::Empty => "empty",
        };
        f.write_str(s)
    }
}

/// Dataset filter: drops constructors, abstract/bodiless methods, methods
/// carrying the override annotation, and methods whose body has no
/// statements. Comment-only bodies count as empty, so the verdict does not
/// change under comment stripping.
pub fn keep_method(method: &ParsedMethod) -> Result<(), RejectReason> {
    if method.is_constructor {
        return Err(RejectReason::Constructor);
    }
    if method.modifiers.contains("abstract") || !method.has_body {
        return Err(RejectReason::Abstract);
    }
    if method.annotations.contains("Override") {
        return Err(RejectReason::Overridden);
    }
    if body_statement_count(method) == 0 {
        return Err(RejectReason::Empty);
    }
    Ok(())
}

fn body_statement_count(method: &ParsedMethod) -> usize {
    method
        .tree
        .children
        .iter()
        .find(|c| matches!(c.kind.as_str(), "block" | "constructor_body"))
        .map(|body| {
            body.children
                .iter()
                .filter(|c| c.kind != "{" && c.kind != "}" && !c.is_comment())
                .count()
        })
        .unwrap_or(0)
}
