//! Plain-text rendering of a segment's score breakdown.

use std::fmt::Write;

use museum_core::evolution::Gate;
use museum_core::scorer::{SegmentExplanation, TermMatches};
use museum_core::{Segment, TokenSet};

const NO_MATCHES: &str = "  no matches";

fn join(set: &TokenSet) -> String {
    set.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")
}

fn term_lines(out: &mut String, m: &TermMatches) {
    if m.is_empty() {
        out.push_str(NO_MATCHES);
        out.push('\n');
        return;
    }
    if !m.exact.is_empty() {
        writeln!(out, "  exact: {}", join(&m.exact)).unwrap();
    }
    if !m.synonym.is_empty() {
        let syns: Vec<String> = m
            .synonym
            .iter()
            .map(|(syn, of)| format!("{} (syn of {})", syn.as_str(), join(of)))
            .collect();
        writeln!(out, "  synonym: {}", syns.join(", ")).unwrap();
    }
}

pub fn render(seg: &Segment, ex: &SegmentExplanation) -> String {
    let score = ex.score();
    let mut out = String::new();
    writeln!(out, "segment {} {}", seg.fingerprint, seg.dom_path).unwrap();

    writeln!(out, "freshness = {}", score.freshness).unwrap();
    match ex.gate {
        Gate::Stale { captured_at } => {
            writeln!(out, "  gated: content pre-existed in snapshot {captured_at}").unwrap()
        }
        Gate::Fresh => term_lines(&mut out, &ex.freshness),
    }

    writeln!(out, "theme = {}", score.theme).unwrap();
    term_lines(&mut out, &ex.theme);

    writeln!(out, "link = {}", score.link).unwrap();
    term_lines(&mut out, &ex.link);

    writeln!(out, "visual = {}", score.visual).unwrap();
    let mut any = false;
    for (class, m) in &ex.visual {
        if m.terms.is_empty() {
            continue;
        }
        any = true;
        writeln!(out, "  {class} (weight {}): {}", m.weight, join(&m.terms)).unwrap();
    }
    if !any {
        out.push_str(NO_MATCHES);
        out.push('\n');
    }

    writeln!(out, "profile = {}", score.profile).unwrap();
    term_lines(&mut out, &ex.profile);

    writeln!(out, "image = {}", score.image).unwrap();
    term_lines(&mut out, &ex.image);

    writeln!(out, "total = {}", score.total).unwrap();
    out
}
