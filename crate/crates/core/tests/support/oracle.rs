//! Brute-force reference computations, kept independent of the engine's
//! scoring and segmentation code paths. Scores are integer half-units.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use museum_core::scorer::SegmentScore;
use museum_core::{Segment, Weight};
use scraper::{Html, Node};

pub type Words = BTreeSet<String>;

pub fn words(set: &museum_core::TokenSet) -> Words {
    set.iter().map(|t| t.as_str().to_owned()).collect()
}

/// Lexicon TSV read without the engine's parser. Terms and synonyms in the
/// fixtures are already lowercase single words.
pub fn read_lexicon(tsv: &str) -> BTreeMap<String, Words> {
    let mut out: BTreeMap<String, Words> = BTreeMap::new();
    for line in tsv.lines() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (term, syns) = line.split_once('\t').expect("tab");
        let entry = out.entry(term.trim().to_lowercase()).or_default();
        for s in syns.split(',') {
            entry.insert(s.trim().to_lowercase());
        }
    }
    out
}

pub fn syn_of(lex: &BTreeMap<String, Words>, set: &Words) -> Words {
    let mut out = Words::new();
    for w in set {
        if let Some(s) = lex.get(w) {
            out.extend(s.iter().cloned());
        }
    }
    out
}

fn overlap(a: &Words, b: &Words) -> i64 {
    a.iter().filter(|w| b.contains(*w)).count() as i64
}

/// 2·|A ∩ T| + |syn(A) ∩ T|
fn halves(lex: &BTreeMap<String, Words>, a: &Words, target: &Words) -> i64 {
    2 * overlap(a, target) + overlap(&syn_of(lex, a), target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfScore {
    pub freshness: i64,
    pub theme: i64,
    pub link: i64,
    pub visual: i64,
    pub profile: i64,
    pub image: i64,
}

impl HalfScore {
    pub fn total(&self) -> i64 {
        self.freshness + self.theme + self.link + self.visual + self.profile + self.image
    }

    pub fn matches(&self, s: &SegmentScore) -> bool {
        let h = |v: i64| Weight::new(v, 2);
        s.freshness == h(self.freshness)
            && s.theme == h(self.theme)
            && s.link == h(self.link)
            && s.visual == h(self.visual)
            && s.profile == h(self.profile)
            && s.image == h(self.image)
            && s.total == h(self.total())
    }
}

pub struct OracleInputs<'a> {
    pub lexicon: &'a BTreeMap<String, Words>,
    pub query: &'a Words,
    pub title: &'a Words,
    pub profile: &'a Words,
    /// Markup class -> weight in half-units.
    pub visual_halves: &'a BTreeMap<String, i64>,
}

pub fn score_segment(seg: &Segment, prior_text: Option<&Words>, inp: &OracleInputs<'_>) -> HalfScore {
    let text = words(&seg.text_tokens);
    let mut expanded = inp.query.clone();
    expanded.extend(syn_of(inp.lexicon, inp.query));
    let fresh = match prior_text {
        None => true,
        Some(p) => overlap(p, &expanded) == 0,
    };
    let mut visual = 0;
    for (class, span) in &seg.visual_spans {
        if let Some(w) = inp.visual_halves.get(class) {
            visual += w * overlap(inp.query, &words(span));
        }
    }
    HalfScore {
        freshness: if fresh { halves(inp.lexicon, inp.query, &text) } else { 0 },
        theme: halves(inp.lexicon, inp.title, &text),
        link: halves(inp.lexicon, inp.query, &words(&seg.link_tokens)),
        visual,
        profile: halves(inp.lexicon, inp.profile, &text),
        image: halves(inp.lexicon, inp.query, &words(&seg.image_alt_tokens)),
    }
}

const HIDDEN: &[&str] = &["head", "script", "style", "noscript", "template"];

/// Pre-order positions of every renderable text node, found by walking the
/// whole parsed document.
pub fn renderable_text_nodes(html: &str) -> BTreeSet<usize> {
    let doc = Html::parse_document(html);
    let mut out = BTreeSet::new();
    for (i, node) in doc.tree.root().descendants().enumerate() {
        let Node::Text(t) = node.value() else { continue };
        if t.trim().is_empty() {
            continue;
        }
        let hidden = node.ancestors().any(|a| {
            a.value()
                .as_element()
                .is_some_and(|e| HIDDEN.contains(&e.name()))
        });
        if !hidden {
            out.insert(i);
        }
    }
    out
}
