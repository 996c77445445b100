//! Randomized invariants. Each `check_*` runs `cases` proptest cases and
//! reports the first minimized failure.
#![allow(dead_code)]

use std::collections::BTreeMap;

use museum_core::evolution::is_fresh;
use museum_core::rank::{rank_pages, RankJob};
use museum_core::scorer::{self, page_score, ScoreRequest};
use museum_core::{
    EvolutionTrack, PageSnapshot, Query, Scorer, Segment, SynonymLexicon, Token, TokenSet,
    VisualWeightTable, Weight,
};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

const CLASSES: [&str; 4] = ["bold", "h1", "h2", "italic"];

fn tok(s: &str) -> Token {
    Token::normalize(s).unwrap()
}

fn word() -> impl Strategy<Value = Token> {
    (0u8..14).prop_map(|i| tok(&format!("w{i}")))
}

fn words(max: usize) -> impl Strategy<Value = TokenSet> {
    btree_set(word(), 0..max)
}

fn subset(of: TokenSet) -> impl Strategy<Value = TokenSet> {
    let items: Vec<Token> = of.into_iter().collect();
    let n = items.len();
    vec(any::<bool>(), n).prop_map(move |mask| {
        items
            .iter()
            .zip(mask)
            .filter(|(_, keep)| *keep)
            .map(|(t, _)| t.clone())
            .collect()
    })
}

prop_compose! {
    fn segment(path: String)(text in words(10))
        (link in subset(text.clone()),
         spans in vec(subset(text.clone()), CLASSES.len()),
         alt in words(4),
         text in Just(text))
        -> Segment
    {
        let visual = CLASSES
            .iter()
            .zip(spans)
            .filter(|(_, s)| !s.is_empty())
            .map(|(c, s)| (c.to_string(), s))
            .collect();
        Segment::new(path.clone(), text, link, alt, visual)
    }
}

fn lexicon() -> impl Strategy<Value = SynonymLexicon> {
    vec((word(), words(3)), 0..6).prop_map(|entries| {
        let mut lex = SynonymLexicon::new();
        for (term, mut syns) in entries {
            syns.remove(&term);
            lex.insert(term, syns).unwrap();
        }
        lex
    })
}

fn weight() -> impl Strategy<Value = Weight> {
    (0i64..12, 1i64..5).prop_map(|(n, d)| Weight::new(n, d))
}

fn table() -> impl Strategy<Value = VisualWeightTable> {
    vec(weight(), CLASSES.len()).prop_map(|ws| VisualWeightTable::from_entries(CLASSES.iter().copied().zip(ws)))
}

#[derive(Debug, Clone)]
pub struct Scenario {
    snapshot: PageSnapshot,
    lexicon: SynonymLexicon,
    query: TokenSet,
    profile: TokenSet,
    table: VisualWeightTable,
    prior: Option<PageSnapshot>,
}

impl Scenario {
    fn track(&self) -> EvolutionTrack {
        EvolutionTrack::from_snapshots(self.snapshot.url.clone(), self.prior.clone().into_iter().collect()).unwrap()
    }
}

fn scenario() -> impl Strategy<Value = Scenario> {
    let segs = (1usize..6).prop_flat_map(|n| {
        (0..n)
            .map(|i| segment(format!("/html/body/div[{}]", i + 1)))
            .collect::<Vec<_>>()
    });
    (segs, words(4), lexicon(), btree_set(word(), 1..4), words(4), table(), any::<u8>())
        .prop_map(|(segments, title, lexicon, query, profile, table, prior_mode)| {
            let snapshot = PageSnapshot {
                url: "https://prop.test/".into(),
                captured_at: 100,
                title_tokens: title,
                segments,
            };
            let prior = match prior_mode % 3 {
                0 => None,
                1 => {
                    let mut p = snapshot.clone();
                    p.captured_at = 50;
                    Some(p)
                }
                _ => {
                    let mut p = snapshot.clone();
                    p.captured_at = 50;
                    for s in p.segments.iter_mut().step_by(2) {
                        let text: TokenSet = s.text_tokens.iter().skip(1).cloned().collect();
                        *s = Segment::new(s.dom_path.clone(), text, TokenSet::new(), TokenSet::new(), BTreeMap::new());
                    }
                    Some(p)
                }
            };
            Scenario { snapshot, lexicon, query, profile, table, prior }
        })
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn score(s: &Scenario, table: &VisualWeightTable) -> museum_core::PageScore {
    let query = Query::new(s.query.clone(), &s.lexicon);
    let track = s.track();
    let scorer = Scorer::new(&s.lexicon, table);
    let req = ScoreRequest { query: &query, profile: &s.profile, track: &track };
    scorer.score_page(&s.snapshot, &req).unwrap()
}

/// total == freshness + theme + link + visual + profile + image
pub fn check_additivity(cases: u32) -> Result<(), String> {
    run(cases, scenario(), |s| {
        for seg in score(&s, &s.table).segments {
            let c = seg.score;
            prop_assert_eq!(c.total, c.freshness + c.theme + c.link + c.visual + c.profile + c.image);
        }
        Ok(())
    })
}

/// page_score · y == Σ totals
pub fn check_mean(cases: u32) -> Result<(), String> {
    run(cases, scenario(), |s| {
        let page = score(&s, &s.table);
        let sum: Weight = page.segments.iter().map(|x| x.score.total).sum();
        let y = Weight::count(page.segments.len());
        prop_assert_eq!(page.page_score * y, sum);
        let scores: Vec<_> = page.segments.iter().map(|x| x.score).collect();
        prop_assert_eq!(page_score(&scores).unwrap(), page.page_score);
        Ok(())
    })
}

/// visual(c · table) == c · visual(table)
pub fn check_visual_scaling(cases: u32) -> Result<(), String> {
    run(cases, (scenario(), weight()), |(s, c)| {
        let base = score(&s, &s.table);
        let scaled = score(&s, &s.table.scaled(c));
        for (a, b) in base.segments.iter().zip(&scaled.segments) {
            prop_assert_eq!(b.score.visual, a.score.visual * c);
        }
        Ok(())
    })
}

#[derive(Debug, Clone)]
struct HalfCase {
    term: Token,
    synonym: Token,
    rest: TokenSet,
}

fn half_case() -> impl Strategy<Value = HalfCase> {
    words(8).prop_map(|mut rest| {
        let term = tok("qterm");
        let synonym = tok("qsyn");
        rest.remove(&term);
        rest.remove(&synonym);
        HalfCase { term, synonym, rest }
    })
}

/// One exact match adds 1 to a coefficient; the same match through a
/// synonym adds exactly 1/2.
pub fn check_synonym_half(cases: u32) -> Result<(), String> {
    run(cases, half_case(), |c| {
        let lex = SynonymLexicon::from_pairs([(c.term.as_str(), vec![c.synonym.as_str()])]).unwrap();
        let q = Query::new(TokenSet::from([c.term.clone()]), &lex);
        let just = |t: &Token| TokenSet::from([t.clone()]);
        let with = |extra: Option<&Token>| {
            let mut s = c.rest.clone();
            s.extend(extra.cloned());
            s
        };
        let seg = |text: TokenSet, link: TokenSet, alt: TokenSet| Segment::new("/x", text, link, alt, BTreeMap::new());
        let empty = TokenSet::new();

        type Coef<'a> = Box<dyn Fn(Option<&Token>) -> Weight + 'a>;
        let coefs: Vec<(&str, Coef)> = vec![
            ("freshness", Box::new(|e| scorer::freshness_weight(&seg(with(e), empty.clone(), empty.clone()), &q, None))),
            ("theme", Box::new(|e| scorer::theme_weight(&seg(with(e), empty.clone(), empty.clone()), &just(&c.term), &lex))),
            ("link", Box::new(|e| scorer::link_weight(&seg(with(e), with(e), empty.clone()), &q))),
            ("image", Box::new(|e| scorer::image_weight(&seg(c.rest.clone(), empty.clone(), with(e)), &q))),
            ("profile", Box::new(|e| scorer::profile_weight(&seg(with(e), empty.clone(), empty.clone()), &just(&c.term), &lex))),
        ];
        for (name, f) in coefs {
            let base = f(None);
            let exact = f(Some(&c.term));
            let syn = f(Some(&c.synonym));
            prop_assert_eq!(exact, base + Weight::from_integer(1), "{} exact", name);
            prop_assert_eq!(syn, base + Weight::HALF, "{} synonym", name);
        }
        Ok(())
    })
}

/// A token-identical prior closes the gate whatever the overlap.
pub fn check_gate_dominance(cases: u32) -> Result<(), String> {
    run(cases, (segment("/x".into()), lexicon(), btree_set(word(), 1..4)), |(seg, lex, terms)| {
        let q = Query::new(terms, &lex);
        let prior = seg.clone();
        let expanded = q.expanded();
        if !seg.text_tokens.is_disjoint(&expanded) {
            prop_assert_eq!(scorer::freshness_weight(&seg, &q, Some(&prior)), Weight::ZERO);
        } else {
            prop_assert_eq!(scorer::freshness_weight(&seg, &q, Some(&prior)), Weight::ZERO);
            prop_assert_eq!(scorer::freshness_weight(&seg, &q, None), Weight::ZERO);
        }
        Ok(())
    })
}

/// Adding an unmatched query term to a segment's text never lowers
/// freshness, profile or theme, and leaves link, image and visual alone.
pub fn check_monotonicity(cases: u32) -> Result<(), String> {
    run(cases, (segment("/x".into()), lexicon(), btree_set(word(), 1..4), words(4), words(4), table()), |(seg, lex, terms, profile, title, table)| {
        let q = Query::new(terms.clone(), &lex);
        let Some(missing) = terms.iter().find(|t| !seg.text_tokens.contains(*t)).cloned() else {
            return Ok(());
        };
        let mut grown = seg.clone();
        grown.text_tokens.insert(missing);
        prop_assert!(scorer::freshness_weight(&grown, &q, None) >= scorer::freshness_weight(&seg, &q, None));
        prop_assert!(scorer::profile_weight(&grown, &profile, &lex) >= scorer::profile_weight(&seg, &profile, &lex));
        prop_assert!(scorer::theme_weight(&grown, &title, &lex) >= scorer::theme_weight(&seg, &title, &lex));
        prop_assert_eq!(scorer::link_weight(&grown, &q), scorer::link_weight(&seg, &q));
        prop_assert_eq!(scorer::image_weight(&grown, &q), scorer::image_weight(&seg, &q));
        prop_assert_eq!(scorer::visual_weight(&grown, &q, &table), scorer::visual_weight(&seg, &q, &table));
        Ok(())
    })
}

/// If a prior closes the gate, any token superset of it does too.
pub fn check_gate_monotone_in_history(cases: u32) -> Result<(), String> {
    run(cases, (segment("/x".into()), words(6), lexicon(), btree_set(word(), 1..4)), |(prior, extra, lex, terms)| {
        let q = Query::new(terms, &lex);
        let mut bigger = prior.clone();
        bigger.text_tokens.extend(extra);
        if !is_fresh(Some(&prior), &q) {
            prop_assert!(!is_fresh(Some(&bigger), &q));
        }
        Ok(())
    })
}

fn visual_only_pages() -> impl Strategy<Value = Vec<(PageSnapshot, EvolutionTrack)>> {
    vec(vec(segment("/p".into()), 1..4), 2..6).prop_map(|pages| {
        pages
            .into_iter()
            .enumerate()
            .map(|(i, segs)| {
                let segments: Vec<Segment> = segs
                    .into_iter()
                    .enumerate()
                    .map(|(j, s)| {
                        Segment::new(format!("/html/body/div[{}]", j + 1), s.text_tokens, TokenSet::new(), TokenSet::new(), s.visual_spans)
                    })
                    .collect();
                let snap = PageSnapshot {
                    url: format!("https://page{}.test/", i % 3 + 10 * i),
                    captured_at: 100,
                    title_tokens: TokenSet::new(),
                    segments,
                };
                let mut prior = snap.clone();
                prior.captured_at = 50;
                let track = EvolutionTrack::from_snapshots(snap.url.clone(), vec![prior]).unwrap();
                (snap, track)
            })
            .collect()
    })
}

/// With visual the only nonzero coefficient, scaling every visual weight
/// by c > 0 keeps the rank order.
pub fn check_rank_scale_invariance(cases: u32) -> Result<(), String> {
    let c = (1i64..20, 1i64..7).prop_map(|(n, d)| Weight::new(n, d));
    run(cases, (visual_only_pages(), btree_set(word(), 1..4), table(), c), |(pages, terms, table, c)| {
        let lex = SynonymLexicon::new();
        let q = Query::new(terms, &lex);
        let profile = TokenSet::new();
        let jobs: Vec<RankJob> = pages.iter().map(|(s, t)| RankJob { snapshot: s, track: t }).collect();
        let scaled = table.scaled(c);
        let a = rank_pages(&Scorer::new(&lex, &table), &jobs, &q, &profile).unwrap();
        let b = rank_pages(&Scorer::new(&lex, &scaled), &jobs, &q, &profile).unwrap();
        for (page, track) in &pages {
            let req = ScoreRequest { query: &q, profile: &profile, track };
            for seg in Scorer::new(&lex, &table).score_page(page, &req).unwrap().segments {
                let s = seg.score;
                prop_assert_eq!(s.total, s.visual);
            }
        }
        let urls = |r: &[museum_core::RankedPage]| r.iter().map(|p| p.url.clone()).collect::<Vec<_>>();
        prop_assert_eq!(urls(&a), urls(&b));
        Ok(())
    })
}

/// The index kept during ingestion equals one rebuilt from the snapshots.
pub fn check_index_rebuild(cases: u32) -> Result<(), String> {
    let history = vec(vec(segment("/s".into()), 1..4), 1..6);
    run(cases, history, |snaps| {
        let mut track = EvolutionTrack::new("https://idx.test/");
        for (i, segs) in snaps.into_iter().enumerate() {
            let segments = segs
                .into_iter()
                .enumerate()
                .map(|(j, s)| Segment::new(format!("/html/body/div[{}]", j % 2 + 1), s.text_tokens, s.link_tokens, s.image_alt_tokens, s.visual_spans))
                .collect();
            track
                .ingest(PageSnapshot {
                    url: "https://idx.test/".into(),
                    captured_at: i as i64 * 10,
                    title_tokens: TokenSet::new(),
                    segments,
                })
                .unwrap();
        }
        let rebuilt = museum_core::evolution::TrackIndex::rebuild(track.snapshots());
        prop_assert_eq!(track.index(), &rebuilt);
        Ok(())
    })
}
