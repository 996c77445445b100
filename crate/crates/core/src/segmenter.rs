//! DOM-block segmentation.
//!
//! A page is split into non-overlapping blocks that together cover every
//! renderable text node. Starting at `body`, a block descends into its
//! nearest block-level descendants that carry at least `min_tokens` tokens;
//! each of those is segmented recursively, and whatever text is left over
//! under the parent becomes one residue segment (`<parent>/#residue`). A
//! block without qualifying descendants is a leaf segment.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use ego_tree::{NodeId, NodeRef};
use scraper::{Html, Node};
use thiserror::Error;
use url::Url;

use crate::lexicon::{Token, TokenSet, Tokenizer};
use crate::model::{PageSnapshot, Segment, Timestamp};

/// Tags whose content is never rendered as page text.
pub const NON_RENDERABLE: &[&str] = &["head", "script", "style", "noscript", "template"];

pub const DEFAULT_BLOCK_ELEMENTS: &[&str] = &[
    "div", "section", "article", "table", "ul", "ol", "nav", "header", "footer", "aside", "main",
    "p",
];

pub const RESIDUE_STEP: &str = "#residue";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmenterConfig {
    pub min_tokens: usize,
    pub block_elements: BTreeSet<String>,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            min_tokens: 10,
            block_elements: DEFAULT_BLOCK_ELEMENTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RawPage {
    pub url: String,
    pub fetched_at: Timestamp,
    pub html: Vec<u8>,
}

impl RawPage {
    pub fn new(url: impl Into<String>, fetched_at: Timestamp, html: impl Into<Vec<u8>>) -> Self {
        RawPage {
            url: url.into(),
            fetched_at,
            html: html.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentError {
    #[error("document has no renderable text")]
    EmptyDocument,
    #[error("input is not decodable as text")]
    DecodeFailure,
    #[error("invalid url `{0}`")]
    InvalidUrl(String),
}

/// Which DOM nodes a segment took, as pre-order positions over the whole
/// parsed tree (`Html::tree.root().descendants()`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SegmentCoverage {
    pub text_nodes: Vec<usize>,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub snapshot: PageSnapshot,
    /// Parallel to `snapshot.segments`.
    pub coverage: Vec<SegmentCoverage>,
}

pub fn segment_page(
    page: &RawPage,
    cfg: &SegmenterConfig,
    tokenizer: &Tokenizer,
) -> Result<PageSnapshot, SegmentError> {
    segment_page_with_coverage(page, cfg, tokenizer).map(|s| s.snapshot)
}

pub fn segment_page_with_coverage(
    page: &RawPage,
    cfg: &SegmenterConfig,
    tokenizer: &Tokenizer,
) -> Result<Segmentation, SegmentError> {
    if page.url.is_empty() || Url::parse(&page.url).is_err() {
        return Err(SegmentError::InvalidUrl(page.url.clone()));
    }
    let text = decode(&page.html)?;
    let html = Html::parse_document(&text);
    let dom = Dom::index(&html, tokenizer);

    let title_tokens = html
        .tree
        .root()
        .descendants()
        .find(|n| element_name(n) == Some("title"))
        .map(|n| tokenizer.token_set(&collect_text(n)))
        .unwrap_or_default();

    let body = html
        .tree
        .root()
        .descendants()
        .find(|n| element_name(n) == Some("body"))
        .ok_or(SegmentError::EmptyDocument)?;
    if dom.text_count[&body.id()] == 0 {
        return Err(SegmentError::EmptyDocument);
    }

    let mut pieces = Vec::new();
    dom.split(body, path_between(body, None), cfg, &mut pieces);
    pieces.sort_by_key(|p| p.coverage.text_nodes[0]);

    let (segments, coverage) = pieces
        .into_iter()
        .map(|p| (dom.build_segment(&html, &p), p.coverage))
        .unzip();

    Ok(Segmentation {
        snapshot: PageSnapshot {
            url: page.url.clone(),
            captured_at: page.fetched_at,
            title_tokens,
            segments,
        },
        coverage,
    })
}

fn decode(bytes: &[u8]) -> Result<String, SegmentError> {
    if bytes.is_empty() {
        return Err(SegmentError::EmptyDocument);
    }
    let text = String::from_utf8_lossy(bytes);
    let total = text.chars().count();
    let replaced = text.chars().filter(|&c| c == char::REPLACEMENT_CHARACTER).count();
    // Mostly undecodable bytes: binary input, not a web page.
    if replaced * 2 > total {
        return Err(SegmentError::DecodeFailure);
    }
    Ok(text.into_owned())
}

fn element_name<'a>(node: &NodeRef<'a, Node>) -> Option<&'a str> {
    node.value().as_element().map(|e| e.name())
}

fn collect_text(node: NodeRef<'_, Node>) -> String {
    let mut out = String::new();
    for d in node.descendants() {
        if let Some(t) = d.value().as_text() {
            out.push_str(t);
            out.push(' ');
        }
    }
    out
}

/// Slash-joined element steps from just below `from` down to `node`
/// inclusive; from the document root when `from` is `None`.
fn path_between(node: NodeRef<'_, Node>, from: Option<NodeId>) -> String {
    let mut steps = Vec::new();
    let mut cur = Some(node);
    while let Some(n) = cur {
        if Some(n.id()) == from {
            break;
        }
        if n.value().is_element() {
            steps.push(path_step(n));
        }
        cur = n.parent();
    }
    steps.reverse();
    steps.iter().map(|s| format!("/{s}")).collect()
}

fn path_step(node: NodeRef<'_, Node>) -> String {
    let name = element_name(&node).unwrap_or_default();
    if name == "html" || name == "body" {
        return name.to_owned();
    }
    let ordinal = 1 + node
        .prev_siblings()
        .filter(|s| element_name(s) == Some(name))
        .count();
    format!("{name}[{ordinal}]")
}

struct Piece {
    dom_path: String,
    coverage: SegmentCoverage,
}

/// Per-node facts computed once per parse.
struct Dom<'t> {
    tokenizer: &'t Tokenizer,
    order: HashMap<NodeId, usize>,
    by_order: Vec<NodeId>,
    renderable: HashMap<NodeId, Vec<Token>>,
    /// Renderable tokens under each element (multiset count).
    token_count: HashMap<NodeId, usize>,
    /// Renderable text nodes under each element.
    text_count: HashMap<NodeId, usize>,
}

impl<'t> Dom<'t> {
    fn index(html: &Html, tokenizer: &'t Tokenizer) -> Self {
        let mut dom = Dom {
            tokenizer,
            order: HashMap::new(),
            by_order: Vec::new(),
            renderable: HashMap::new(),
            token_count: HashMap::new(),
            text_count: HashMap::new(),
        };
        for (i, n) in html.tree.root().descendants().enumerate() {
            dom.order.insert(n.id(), i);
            dom.by_order.push(n.id());
        }
        dom.visit(html.tree.root(), false);
        dom
    }

    fn visit(&mut self, node: NodeRef<'_, Node>, hidden: bool) -> (usize, usize) {
        match node.value() {
            Node::Text(t) => {
                if hidden || t.trim().is_empty() {
                    return (0, 0);
                }
                let toks = self.tokenizer.tokenize(t);
                let n = toks.len();
                self.renderable.insert(node.id(), toks);
                (n, 1)
            }
            Node::Comment(_) | Node::ProcessingInstruction(_) | Node::Doctype(_) => (0, 0),
            _ => {
                let hidden = hidden
                    || element_name(&node).is_some_and(|name| NON_RENDERABLE.contains(&name));
                let (mut toks, mut texts) = (0, 0);
                for child in node.children() {
                    let (a, b) = self.visit(child, hidden);
                    toks += a;
                    texts += b;
                }
                self.token_count.insert(node.id(), toks);
                self.text_count.insert(node.id(), texts);
                (toks, texts)
            }
        }
    }

    /// Nearest block-level element descendants, not looking through blocks.
    fn block_frontier<'a>(
        &self,
        node: NodeRef<'a, Node>,
        cfg: &SegmenterConfig,
        out: &mut Vec<NodeRef<'a, Node>>,
    ) {
        for child in node.children() {
            let Some(name) = element_name(&child) else {
                continue;
            };
            if NON_RENDERABLE.contains(&name) {
                continue;
            }
            if cfg.block_elements.contains(name) {
                out.push(child);
            } else {
                self.block_frontier(child, cfg, out);
            }
        }
    }

    fn qualifies(&self, node: NodeRef<'_, Node>, cfg: &SegmenterConfig) -> bool {
        self.text_count[&node.id()] > 0 && self.token_count[&node.id()] >= cfg.min_tokens
    }

    fn split(&self, node: NodeRef<'_, Node>, path: String, cfg: &SegmenterConfig, out: &mut Vec<Piece>) {
        let mut frontier = Vec::new();
        self.block_frontier(node, cfg, &mut frontier);
        let chosen: Vec<_> = frontier.into_iter().filter(|c| self.qualifies(*c, cfg)).collect();

        if chosen.is_empty() {
            let coverage = self.cover(node, &HashSet::new(), true);
            out.push(Piece { dom_path: path, coverage });
            return;
        }

        let taken: HashSet<NodeId> = chosen.iter().map(|c| c.id()).collect();
        for child in &chosen {
            let child_path = format!("{path}{}", path_between(*child, Some(node.id())));
            self.split(*child, child_path, cfg, out);
        }
        let residue = self.cover(node, &taken, false);
        if !residue.text_nodes.is_empty() {
            out.push(Piece {
                dom_path: format!("{path}/{RESIDUE_STEP}"),
                coverage: residue,
            });
        }
    }

    /// Nodes under `node` outside the `skip` subtrees.
    fn cover(&self, node: NodeRef<'_, Node>, skip: &HashSet<NodeId>, include_self: bool) -> SegmentCoverage {
        let mut cov = SegmentCoverage::default();
        if include_self {
            cov.nodes.push(self.order[&node.id()]);
        }
        let mut stack: Vec<_> = node.children().collect();
        stack.reverse();
        while let Some(n) = stack.pop() {
            if skip.contains(&n.id()) {
                continue;
            }
            let pos = self.order[&n.id()];
            cov.nodes.push(pos);
            if self.renderable.contains_key(&n.id()) {
                cov.text_nodes.push(pos);
            }
            let mut kids: Vec<_> = n.children().collect();
            kids.reverse();
            stack.extend(kids);
        }
        cov
    }

    fn build_segment(&self, html: &Html, piece: &Piece) -> Segment {
        let mut text = TokenSet::new();
        let mut links = TokenSet::new();
        let mut alts = TokenSet::new();
        let mut spans: BTreeMap<String, TokenSet> = BTreeMap::new();

        for &pos in &piece.coverage.nodes {
            let Some(n) = html.tree.get(self.by_order[pos]) else {
                continue;
            };
            if let Some(toks) = self.renderable.get(&n.id()) {
                text.extend(toks.iter().cloned());
                let mut in_anchor = false;
                let mut classes = BTreeSet::new();
                for anc in n.ancestors() {
                    match element_name(&anc) {
                        Some("a") => in_anchor = true,
                        Some(name) => {
                            if let Some(class) = visual_class(name) {
                                classes.insert(class);
                            }
                        }
                        None => {}
                    }
                }
                if in_anchor {
                    links.extend(toks.iter().cloned());
                }
                for class in classes {
                    spans.entry(class.to_owned()).or_default().extend(toks.iter().cloned());
                }
            } else if let Some(el) = n.value().as_element() {
                if el.name() == "img" {
                    if let Some(alt) = el.attr("alt") {
                        alts.extend(self.tokenizer.tokenize(alt));
                    }
                }
            }
        }
        spans.retain(|_, v| !v.is_empty());
        Segment::new(piece.dom_path.clone(), text, links, alts, spans)
    }

}

/// Markup class a tag contributes to `visual_spans`.
pub fn visual_class(tag: &str) -> Option<&'static str> {
    Some(match tag {
        "h1" => "h1",
        "h2" => "h2",
        "h3" => "h3",
        "h4" => "h4",
        "h5" => "h5",
        "h6" => "h6",
        "b" | "strong" => "bold",
        "em" | "i" => "italic",
        "u" => "underline",
        "mark" => "mark",
        _ => return None,
    })
}
