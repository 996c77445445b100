//! Page evolution track: the snapshot history of one URL and the freshness
//! gate that decides whether queried content in a segment is new.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Fingerprint, PageSnapshot, Segment, Timestamp};
use crate::query::Query;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrackError {
    #[error("snapshot url `{got}` does not match track url `{expected}`")]
    UrlMismatch { expected: String, got: String },
    #[error("snapshot captured_at {got} is not after the latest snapshot ({latest})")]
    NonMonotonicTimestamp { latest: Timestamp, got: Timestamp },
}

/// Where a prior segment lives in the track.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SegmentRef {
    pub captured_at: Timestamp,
    pub position: usize,
}

/// Lookup tables from fingerprint and dom path to the most recent segment
/// carrying them. Always derivable from the snapshot list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackIndex {
    pub by_fingerprint: BTreeMap<Fingerprint, SegmentRef>,
    pub by_dom_path: BTreeMap<String, SegmentRef>,
}

impl TrackIndex {
    pub fn rebuild(snapshots: &[PageSnapshot]) -> Self {
        let mut index = TrackIndex::default();
        for snap in snapshots {
            index.add(snap);
        }
        index
    }

    fn add(&mut self, snap: &PageSnapshot) {
        for (position, seg) in snap.segments.iter().enumerate() {
            let r = SegmentRef {
                captured_at: snap.captured_at,
                position,
            };
            self.by_fingerprint.insert(seg.fingerprint, r);
            self.by_dom_path.insert(seg.dom_path.clone(), r);
        }
    }
}

/// A segment from an earlier snapshot matched to a current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PriorMatch<'a> {
    pub captured_at: Timestamp,
    pub segment: &'a Segment,
}

/// How much history the freshness gate looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HistoryDepth {
    /// Only the most recent matched prior segment.
    #[default]
    MostRecent,
    /// The matched segment of every earlier snapshot.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionTrack {
    url: String,
    snapshots: Vec<PageSnapshot>,
    index: TrackIndex,
}

impl EvolutionTrack {
    pub fn new(url: impl Into<String>) -> Self {
        EvolutionTrack {
            url: url.into(),
            snapshots: Vec::new(),
            index: TrackIndex::default(),
        }
    }

    /// Rebuilds a track from an ordered snapshot list.
    pub fn from_snapshots(
        url: impl Into<String>,
        snapshots: Vec<PageSnapshot>,
    ) -> Result<Self, TrackError> {
        let mut track = EvolutionTrack::new(url);
        for snap in snapshots {
            track.ingest(snap)?;
        }
        Ok(track)
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn snapshots(&self) -> &[PageSnapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn latest(&self) -> Option<&PageSnapshot> {
        self.snapshots.last()
    }

    pub fn snapshot_at(&self, captured_at: Timestamp) -> Option<&PageSnapshot> {
        self.snapshots
            .binary_search_by_key(&captured_at, |s| s.captured_at)
            .ok()
            .map(|i| &self.snapshots[i])
    }

    pub fn index(&self) -> &TrackIndex {
        &self.index
    }

    pub fn check_append(&self, snap: &PageSnapshot) -> Result<(), TrackError> {
        if snap.url != self.url {
            return Err(TrackError::UrlMismatch {
                expected: self.url.clone(),
                got: snap.url.clone(),
            });
        }
        if let Some(last) = self.latest() {
            if snap.captured_at <= last.captured_at {
                return Err(TrackError::NonMonotonicTimestamp {
                    latest: last.captured_at,
                    got: snap.captured_at,
                });
            }
        }
        Ok(())
    }

    pub fn ingest(&mut self, snap: PageSnapshot) -> Result<(), TrackError> {
        self.check_append(&snap)?;
        self.index.add(&snap);
        self.snapshots.push(snap);
        Ok(())
    }

    fn resolve(&self, r: SegmentRef) -> Option<PriorMatch<'_>> {
        let snap = self.snapshot_at(r.captured_at)?;
        snap.segments.get(r.position).map(|segment| PriorMatch {
            captured_at: r.captured_at,
            segment,
        })
    }

    /// Most recent prior segment with the same fingerprint, else the most
    /// recent one with the same dom path.
    pub fn match_prior(&self, seg: &Segment) -> Option<PriorMatch<'_>> {
        self.index
            .by_fingerprint
            .get(&seg.fingerprint)
            .or_else(|| self.index.by_dom_path.get(&seg.dom_path))
            .and_then(|r| self.resolve(*r))
    }

    /// Like [`match_prior`](Self::match_prior) but ignores snapshots taken
    /// at or after `before`.
    pub fn match_prior_before(&self, seg: &Segment, before: Timestamp) -> Option<PriorMatch<'_>> {
        if self.latest().is_none_or(|l| l.captured_at < before) {
            return self.match_prior(seg);
        }
        let history = self.history_before(before);
        let find = |pred: &dyn Fn(&Segment) -> bool| {
            history.iter().rev().find_map(|snap| {
                snap.segments.iter().find(|s| pred(s)).map(|segment| PriorMatch {
                    captured_at: snap.captured_at,
                    segment,
                })
            })
        };
        find(&|s| s.fingerprint == seg.fingerprint).or_else(|| find(&|s| s.dom_path == seg.dom_path))
    }

    /// For each snapshot before `before`, newest first, the segment matching
    /// `seg` within that snapshot (fingerprint first, then dom path).
    pub fn priors_before(&self, seg: &Segment, before: Timestamp) -> Vec<PriorMatch<'_>> {
        self.history_before(before)
            .iter()
            .rev()
            .filter_map(|snap| {
                snap.segments
                    .iter()
                    .find(|s| s.fingerprint == seg.fingerprint)
                    .or_else(|| snap.segments.iter().find(|s| s.dom_path == seg.dom_path))
                    .map(|segment| PriorMatch {
                        captured_at: snap.captured_at,
                        segment,
                    })
            })
            .collect()
    }

    fn history_before(&self, before: Timestamp) -> &[PageSnapshot] {
        let end = self.snapshots.partition_point(|s| s.captured_at < before);
        &self.snapshots[..end]
    }
}

/// The freshness gate: a segment is fresh when it has no prior version, or
/// when its prior version held none of the query terms or their synonyms.
pub fn is_fresh(prior: Option<&Segment>, query: &Query) -> bool {
    match prior {
        None => true,
        Some(p) => {
            let expanded = query.expanded();
            p.text_tokens.is_disjoint(&expanded)
        }
    }
}

/// Outcome of the gate, keeping the snapshot that closed it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Fresh,
    Stale { captured_at: Timestamp },
}

impl Gate {
    pub fn is_open(&self) -> bool {
        matches!(self, Gate::Fresh)
    }
}

/// Evaluates the gate for `seg` as captured at `at` against earlier
/// history in `track`.
pub fn freshness_gate(
    track: &EvolutionTrack,
    seg: &Segment,
    at: Timestamp,
    query: &Query,
    depth: HistoryDepth,
) -> Gate {
    let priors = match depth {
        HistoryDepth::MostRecent => track.match_prior_before(seg, at).into_iter().collect(),
        HistoryDepth::Full => track.priors_before(seg, at),
    };
    priors
        .into_iter()
        .find(|p| !is_fresh(Some(p.segment), query))
        .map_or(Gate::Fresh, |p| Gate::Stale {
            captured_at: p.captured_at,
        })
}
