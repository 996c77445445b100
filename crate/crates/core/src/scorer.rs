//! The six segment coefficients, the segment total and the page score.
//!
//! Every coefficient counts distinct matching tokens (set semantics). A
//! synonym match is worth half an exact match. Freshness only counts when
//! the gate is open; visual weight is exact-match only and scales each
//! markup class by its table weight.

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::evolution::{freshness_gate, is_fresh, EvolutionTrack, Gate, HistoryDepth};
use crate::lexicon::{SynonymLexicon, Token, TokenSet};
use crate::model::{Fingerprint, PageSnapshot, Segment};
use crate::query::Query;
use crate::segmenter::visual_class;
use crate::weight::Weight;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("query has no terms after normalization")]
    EmptyQuery,
    #[error("page has no segments")]
    NoSegments,
}

/// Markup class to weight. Unknown classes weigh 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisualWeightTable {
    entries: BTreeMap<String, Weight>,
}

impl Default for VisualWeightTable {
    fn default() -> Self {
        VisualWeightTable::from_entries([
            ("h1", Weight::from_integer(3)),
            ("h2", Weight::new(5, 2)),
            ("h3", Weight::from_integer(2)),
            ("bold", Weight::from_integer(2)),
            ("italic", Weight::new(3, 2)),
        ])
    }
}

impl VisualWeightTable {
    pub fn empty() -> Self {
        VisualWeightTable {
            entries: BTreeMap::new(),
        }
    }

    /// Tag aliases (`strong`, `b`, `em`, `i`) are folded onto their class.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, Weight)>,
        S: AsRef<str>,
    {
        let mut table = VisualWeightTable::empty();
        for (k, w) in entries {
            table.set(k.as_ref(), w);
        }
        table
    }

    pub fn set(&mut self, class: &str, weight: Weight) {
        let key = class.to_ascii_lowercase();
        let key = visual_class(&key).map(str::to_owned).unwrap_or(key);
        self.entries.insert(key, weight);
    }

    pub fn weight(&self, class: &str) -> Weight {
        self.entries.get(class).copied().unwrap_or(Weight::ZERO)
    }

    pub fn entries(&self) -> &BTreeMap<String, Weight> {
        &self.entries
    }

    pub fn scaled(&self, factor: Weight) -> Self {
        VisualWeightTable {
            entries: self.entries.iter().map(|(k, w)| (k.clone(), *w * factor)).collect(),
        }
    }
}

/// The six coefficients of one segment and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SegmentScore {
    pub freshness: Weight,
    pub theme: Weight,
    pub link: Weight,
    pub visual: Weight,
    pub profile: Weight,
    pub image: Weight,
    pub total: Weight,
}

impl SegmentScore {
    pub fn components(&self) -> [(&'static str, Weight); 6] {
        [
            ("freshness", self.freshness),
            ("theme", self.theme),
            ("link", self.link),
            ("visual", self.visual),
            ("profile", self.profile),
            ("image", self.image),
        ]
    }
}

/// Consolidated segment weight: the exact sum of the six coefficients.
pub fn segment_total(
    freshness: Weight,
    theme: Weight,
    link: Weight,
    visual: Weight,
    profile: Weight,
    image: Weight,
) -> SegmentScore {
    SegmentScore {
        freshness,
        theme,
        link,
        visual,
        profile,
        image,
        total: freshness + theme + link + visual + profile + image,
    }
}

/// Mean of the segment totals.
pub fn page_score(scores: &[SegmentScore]) -> Result<Weight, ScoreError> {
    if scores.is_empty() {
        return Err(ScoreError::NoSegments);
    }
    Ok(scores.iter().map(|s| s.total).sum::<Weight>() / scores.len())
}

/// Tokens responsible for one set-valued coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermMatches {
    pub exact: TokenSet,
    /// Matched synonym -> the source terms it is a synonym of.
    pub synonym: BTreeMap<Token, TokenSet>,
}

impl TermMatches {
    /// Matches `sources` and `syn(sources)` against `target`.
    pub fn compute(sources: &TokenSet, lexicon: &SynonymLexicon, target: &TokenSet) -> Self {
        let exact = sources.intersection(target).cloned().collect();
        let mut synonym: BTreeMap<Token, TokenSet> = BTreeMap::new();
        for src in sources {
            for s in lexicon.syn(src) {
                if target.contains(s) {
                    synonym.entry(s.clone()).or_default().insert(src.clone());
                }
            }
        }
        TermMatches { exact, synonym }
    }

    fn for_query(query: &Query, target: &TokenSet) -> Self {
        let exact = query.terms().intersection(target).cloned().collect();
        let mut synonym: BTreeMap<Token, TokenSet> = BTreeMap::new();
        for (src, syns) in query.synonyms() {
            for s in syns.intersection(target) {
                synonym.entry(s.clone()).or_default().insert(src.clone());
            }
        }
        TermMatches { exact, synonym }
    }

    /// |exact| + |synonym| / 2
    pub fn value(&self) -> Weight {
        Weight::count(self.exact.len()) + Weight::halves(self.synonym.len())
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty() && self.synonym.is_empty()
    }
}

/// Query terms found inside one markup class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisualMatch {
    pub weight: Weight,
    pub terms: TokenSet,
}

impl VisualMatch {
    pub fn value(&self) -> Weight {
        self.weight * Weight::count(self.terms.len())
    }
}

/// Every match behind a segment's score. The score is derived from it, so
/// the breakdown and the numbers cannot drift apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentExplanation {
    pub gate: Gate,
    /// Empty when the gate is closed.
    pub freshness: TermMatches,
    pub theme: TermMatches,
    pub link: TermMatches,
    pub visual: BTreeMap<String, VisualMatch>,
    pub profile: TermMatches,
    pub image: TermMatches,
}

impl SegmentExplanation {
    pub fn score(&self) -> SegmentScore {
        segment_total(
            self.freshness.value(),
            self.theme.value(),
            self.link.value(),
            self.visual.values().map(VisualMatch::value).sum(),
            self.profile.value(),
            self.image.value(),
        )
    }
}

fn freshness_matches(seg: &Segment, query: &Query, gate_open: bool) -> TermMatches {
    if gate_open {
        TermMatches::for_query(query, &seg.text_tokens)
    } else {
        TermMatches::default()
    }
}

/// |Q ∩ text| when the gate passes, else 0.
pub fn actual_freshness(seg: &Segment, query: &Query, prior: Option<&Segment>) -> Weight {
    Weight::count(freshness_matches(seg, query, is_fresh(prior, query)).exact.len())
}

/// |syn(Q) ∩ text| / 2 when the gate passes, else 0.
pub fn synonym_freshness(seg: &Segment, query: &Query, prior: Option<&Segment>) -> Weight {
    Weight::halves(freshness_matches(seg, query, is_fresh(prior, query)).synonym.len())
}

pub fn freshness_weight(seg: &Segment, query: &Query, prior: Option<&Segment>) -> Weight {
    freshness_matches(seg, query, is_fresh(prior, query)).value()
}

/// Title against segment text; query-independent.
pub fn theme_weight(seg: &Segment, title: &TokenSet, lexicon: &SynonymLexicon) -> Weight {
    TermMatches::compute(title, lexicon, &seg.text_tokens).value()
}

pub fn image_weight(seg: &Segment, query: &Query) -> Weight {
    TermMatches::for_query(query, &seg.image_alt_tokens).value()
}

pub fn link_weight(seg: &Segment, query: &Query) -> Weight {
    TermMatches::for_query(query, &seg.link_tokens).value()
}

/// Profile keywords against segment text.
pub fn profile_weight(seg: &Segment, profile: &TokenSet, lexicon: &SynonymLexicon) -> Weight {
    TermMatches::compute(profile, lexicon, &seg.text_tokens).value()
}

fn visual_matches(seg: &Segment, query: &Query, table: &VisualWeightTable) -> BTreeMap<String, VisualMatch> {
    table
        .entries()
        .iter()
        .filter_map(|(class, weight)| {
            let span = seg.visual_spans.get(class)?;
            let terms: TokenSet = query.terms().intersection(span).cloned().collect();
            (!terms.is_empty()).then(|| {
                (
                    class.clone(),
                    VisualMatch {
                        weight: *weight,
                        terms,
                    },
                )
            })
        })
        .collect()
}

/// Σ weight(c) · |Q ∩ span(c)| over the table's classes.
pub fn visual_weight(seg: &Segment, query: &Query, table: &VisualWeightTable) -> Weight {
    visual_matches(seg, query, table).values().map(VisualMatch::value).sum()
}

/// A scored segment, in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredSegment {
    pub fingerprint: Fingerprint,
    pub dom_path: String,
    pub score: SegmentScore,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageScore {
    pub url: String,
    pub query_terms: TokenSet,
    pub segments: Vec<ScoredSegment>,
    pub page_score: Weight,
}

impl Serialize for PageScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("PageScore", 4)?;
        st.serialize_field("url", &self.url)?;
        st.serialize_field("query", &self.query_terms)?;
        st.serialize_field("page_score", &self.page_score)?;
        st.serialize_field("segments", &self.segments)?;
        st.end()
    }
}

impl Serialize for ScoredSegment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ScoredSegment", 4)?;
        st.serialize_field("fingerprint", &self.fingerprint)?;
        st.serialize_field("dom_path", &self.dom_path)?;
        st.serialize_field("coefficients", &Ordered(&self.score))?;
        st.serialize_field("total", &self.score.total)?;
        st.end()
    }
}

/// Coefficients in their canonical order rather than alphabetical.
struct Ordered<'a>(&'a SegmentScore);

impl Serialize for Ordered<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Coefficients", 6)?;
        for (name, w) in self.0.components() {
            st.serialize_field(name, &w)?;
        }
        st.end()
    }
}

/// Scores pages against a query with a fixed lexicon, visual table and
/// history depth.
#[derive(Debug, Clone, Copy)]
pub struct Scorer<'a> {
    pub lexicon: &'a SynonymLexicon,
    pub visual: &'a VisualWeightTable,
    pub depth: HistoryDepth,
}

/// Everything a page is scored against besides its own snapshot.
#[derive(Debug, Clone, Copy)]
pub struct ScoreRequest<'a> {
    pub query: &'a Query,
    pub profile: &'a TokenSet,
    pub track: &'a EvolutionTrack,
}

impl<'a> Scorer<'a> {
    pub fn new(lexicon: &'a SynonymLexicon, visual: &'a VisualWeightTable) -> Self {
        Scorer {
            lexicon,
            visual,
            depth: HistoryDepth::MostRecent,
        }
    }

    pub fn with_depth(mut self, depth: HistoryDepth) -> Self {
        self.depth = depth;
        self
    }

    /// Full breakdown of one segment of `snapshot`. Freshness is judged
    /// only against history strictly older than the snapshot.
    pub fn explain_segment(
        &self,
        snapshot: &PageSnapshot,
        seg: &Segment,
        req: &ScoreRequest<'_>,
    ) -> SegmentExplanation {
        let gate = freshness_gate(req.track, seg, snapshot.captured_at, req.query, self.depth);
        SegmentExplanation {
            gate,
            freshness: freshness_matches(seg, req.query, gate.is_open()),
            theme: TermMatches::compute(&snapshot.title_tokens, self.lexicon, &seg.text_tokens),
            link: TermMatches::for_query(req.query, &seg.link_tokens),
            visual: visual_matches(seg, req.query, self.visual),
            profile: TermMatches::compute(req.profile, self.lexicon, &seg.text_tokens),
            image: TermMatches::for_query(req.query, &seg.image_alt_tokens),
        }
    }

    fn scored(&self, snapshot: &PageSnapshot, seg: &Segment, req: &ScoreRequest<'_>) -> ScoredSegment {
        ScoredSegment {
            fingerprint: seg.fingerprint,
            dom_path: seg.dom_path.clone(),
            score: self.explain_segment(snapshot, seg, req).score(),
        }
    }

    fn check(snapshot: &PageSnapshot, req: &ScoreRequest<'_>) -> Result<(), ScoreError> {
        if req.query.is_empty() {
            return Err(ScoreError::EmptyQuery);
        }
        if snapshot.segments.is_empty() {
            return Err(ScoreError::NoSegments);
        }
        Ok(())
    }

    fn assemble(snapshot: &PageSnapshot, req: &ScoreRequest<'_>, segments: Vec<ScoredSegment>) -> Result<PageScore, ScoreError> {
        let scores: Vec<SegmentScore> = segments.iter().map(|s| s.score).collect();
        Ok(PageScore {
            url: snapshot.url.clone(),
            query_terms: req.query.terms().clone(),
            page_score: page_score(&scores)?,
            segments,
        })
    }

    /// Scores every segment, in parallel when the `parallel` feature is on.
    pub fn score_page(&self, snapshot: &PageSnapshot, req: &ScoreRequest<'_>) -> Result<PageScore, ScoreError> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            Self::check(snapshot, req)?;
            let segments = snapshot
                .segments
                .par_iter()
                .map(|seg| self.scored(snapshot, seg, req))
                .collect();
            Self::assemble(snapshot, req, segments)
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.score_page_sequential(snapshot, req)
        }
    }

    pub fn score_page_sequential(
        &self,
        snapshot: &PageSnapshot,
        req: &ScoreRequest<'_>,
    ) -> Result<PageScore, ScoreError> {
        Self::check(snapshot, req)?;
        let segments = snapshot
            .segments
            .iter()
            .map(|seg| self.scored(snapshot, seg, req))
            .collect();
        Self::assemble(snapshot, req, segments)
    }
}
