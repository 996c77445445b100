//! Fixture corpus and the whole-corpus checks built on it.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use museum_core::model::is_path_ancestor;
use museum_core::scorer::ScoreRequest;
use museum_core::segmenter::{segment_page_with_coverage, Segmentation};
use museum_core::{
    segment_page, EvolutionTrack, PageSnapshot, Query, RawPage, Scorer, Segment, SegmenterConfig,
    SynonymLexicon, Tokenizer, UserProfile, VisualWeightTable, Weight,
};

use super::oracle::{self, OracleInputs};

pub const QUERIES: [&str; 10] = [
    "solar energy",
    "wind",
    "battery storage",
    "solar panel cost",
    "finance",
    "photovoltaic",
    "electricity prices",
    "hydro power",
    "turbines grid",
    "zebra",
];

pub const PROFILES: [&str; 3] = ["investor", "hobbyist", "anonymous"];

pub const THRESHOLDS: [usize; 6] = [0, 1, 5, 10, 25, 1000];

/// Works from any crate under `crates/`.
pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

/// `(file name, html)` for every fixture page, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut pages: Vec<_> = fs::read_dir(fixtures().join("pages"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&p).unwrap())
        })
        .collect();
    pages.sort();
    pages
}

pub fn fixture_url(name: &str) -> String {
    format!("https://fixtures.test/{name}")
}

pub fn segment(name: &str, html: &str, min_tokens: usize) -> Segmentation {
    let cfg = SegmenterConfig {
        min_tokens,
        ..SegmenterConfig::default()
    };
    let page = RawPage::new(fixture_url(name), 1000, html);
    segment_page_with_coverage(&page, &cfg, &Tokenizer::default()).unwrap()
}

/// Every renderable text node in exactly one segment, no node shared, no
/// dom path repeated or nested in another.
pub fn check_partition(name: &str, html: &str, seg: &Segmentation) -> Result<(), String> {
    let expected = oracle::renderable_text_nodes(html);
    let mut seen_text = BTreeSet::new();
    let mut seen_nodes = BTreeSet::new();
    for cov in &seg.coverage {
        for t in &cov.text_nodes {
            if !seen_text.insert(*t) {
                return Err(format!("{name}: text node {t} assigned twice"));
            }
        }
        for n in &cov.nodes {
            if !seen_nodes.insert(*n) {
                return Err(format!("{name}: node {n} shared by two segments"));
            }
        }
    }
    if seen_text != expected {
        let missing: Vec<_> = expected.difference(&seen_text).collect();
        let extra: Vec<_> = seen_text.difference(&expected).collect();
        return Err(format!("{name}: uncovered text nodes {missing:?}, non-text extras {extra:?}"));
    }
    let paths: Vec<_> = seg.snapshot.segments.iter().map(|s| s.dom_path.as_str()).collect();
    for (i, a) in paths.iter().enumerate() {
        for (j, b) in paths.iter().enumerate() {
            if i != j && (a == b || is_path_ancestor(a, b)) {
                return Err(format!("{name}: dom paths {a} and {b} overlap"));
            }
        }
    }
    Ok(())
}

/// Partition check over every page at every threshold. Returns the number
/// of segmentations checked.
pub fn partition_corpus() -> Result<usize, String> {
    let pages = corpus();
    if pages.len() < 12 {
        return Err(format!("corpus has {} pages, need at least 12", pages.len()));
    }
    let mut n = 0;
    for (name, html) in &pages {
        for t in THRESHOLDS {
            check_partition(name, html, &segment(name, html, t))?;
            n += 1;
        }
    }
    Ok(n)
}

pub fn fixture_lexicon_text() -> String {
    fs::read_to_string(fixtures().join("lexicon.tsv")).unwrap()
}

pub fn profiles(tokenizer: &Tokenizer) -> Vec<UserProfile> {
    PROFILES
        .iter()
        .map(|n| UserProfile::load(&fixtures().join(format!("profiles/{n}.txt")), tokenizer).unwrap())
        .collect()
}

fn visual_halves(table: &VisualWeightTable) -> Result<BTreeMap<String, i64>, String> {
    table
        .entries()
        .iter()
        .map(|(k, w)| {
            let twice = *w * Weight::from_integer(2);
            if twice.denom() != 1 {
                return Err(format!("weight for {k} is not a multiple of 1/2"));
            }
            Ok((k.clone(), twice.numer()))
        })
        .collect()
}

fn with_prior(snap: &PageSnapshot, edit: bool) -> EvolutionTrack {
    let mut prior = snap.clone();
    prior.captured_at = snap.captured_at - 10;
    if edit {
        // Every other segment rewritten, so dom-path matching finds priors
        // lacking most query terms.
        for s in prior.segments.iter_mut().step_by(2) {
            *s = Segment::new(
                s.dom_path.clone(),
                Tokenizer::default().token_set("placeholder text energy"),
                Default::default(),
                Default::default(),
                Default::default(),
            );
        }
    }
    EvolutionTrack::from_snapshots(snap.url.clone(), vec![prior]).unwrap()
}

fn prior_text(track: &EvolutionTrack, seg: &Segment) -> Option<oracle::Words> {
    let p = track.snapshots().last()?;
    p.segments
        .iter()
        .find(|s| s.fingerprint == seg.fingerprint)
        .or_else(|| p.segments.iter().find(|s| s.dom_path == seg.dom_path))
        .map(|s| oracle::words(&s.text_tokens))
}

/// Every page × query × profile × {no history, identical prior, edited
/// prior}, engine against oracle with exact equality. Returns the number
/// of segment scores compared.
pub fn oracle_equivalence() -> Result<usize, String> {
    let tokenizer = Tokenizer::default();
    let lex_text = fixture_lexicon_text();
    let lexicon = SynonymLexicon::parse(&lex_text, &tokenizer).map_err(|e| e.to_string())?;
    let oracle_lex = oracle::read_lexicon(&lex_text);
    let table = VisualWeightTable::default();
    let halves = visual_halves(&table)?;
    let scorer = Scorer::new(&lexicon, &table);
    let profiles = profiles(&tokenizer);

    let mut checked = 0;
    for (name, html) in corpus() {
        let page = RawPage::new(fixture_url(&name), 1000, html.as_str());
        let snap = segment_page(&page, &SegmenterConfig::default(), &tokenizer).map_err(|e| format!("{name}: {e}"))?;
        let histories = [EvolutionTrack::new(snap.url.clone()), with_prior(&snap, false), with_prior(&snap, true)];
        for track in &histories {
            for raw in QUERIES {
                let query = Query::parse(raw, &tokenizer, &lexicon);
                let q_words = oracle::words(query.terms());
                for profile in &profiles {
                    let req = ScoreRequest {
                        query: &query,
                        profile: &profile.keywords,
                        track,
                    };
                    let scored = scorer.score_page(&snap, &req).map_err(|e| e.to_string())?;
                    let inputs = OracleInputs {
                        lexicon: &oracle_lex,
                        query: &q_words,
                        title: &oracle::words(&snap.title_tokens),
                        profile: &oracle::words(&profile.keywords),
                        visual_halves: &halves,
                    };
                    let mut sum = 0;
                    for (seg, got) in snap.segments.iter().zip(&scored.segments) {
                        let want = oracle::score_segment(seg, prior_text(track, seg).as_ref(), &inputs);
                        if !want.matches(&got.score) {
                            return Err(format!(
                                "{name} {} q={raw} profile={}: oracle {want:?} engine {:?}",
                                seg.dom_path, profile.profile_id, got.score
                            ));
                        }
                        sum += want.total();
                        checked += 1;
                    }
                    let y = snap.segments.len() as i64;
                    if scored.page_score != Weight::new(sum, 2 * y) {
                        return Err(format!("{name} q={raw}: page score {} vs oracle {sum}/{}", scored.page_score, 2 * y));
                    }
                }
            }
        }
    }
    Ok(checked)
}
