//! Re-ranking a list of pages by page score.

use std::cmp::Ordering;

use serde::Serialize;

use crate::evolution::EvolutionTrack;
use crate::lexicon::TokenSet;
use crate::model::PageSnapshot;
use crate::query::Query;
use crate::scorer::{PageScore, ScoreError, ScoreRequest, Scorer};
use crate::weight::Weight;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedPage {
    pub rank: usize,
    pub url: String,
    pub page_score: Weight,
}

/// One page to rank: the snapshot to score and the track it came from.
#[derive(Debug, Clone, Copy)]
pub struct RankJob<'a> {
    pub snapshot: &'a PageSnapshot,
    pub track: &'a EvolutionTrack,
}

/// Descending page score; equal scores fall back to ascending URL.
pub fn rank_order(a: &PageScore, b: &PageScore) -> Ordering {
    b.page_score.cmp(&a.page_score).then_with(|| a.url.cmp(&b.url))
}

pub fn rank(mut scores: Vec<PageScore>) -> Vec<RankedPage> {
    scores.sort_by(rank_order);
    scores
        .into_iter()
        .enumerate()
        .map(|(i, s)| RankedPage {
            rank: i + 1,
            url: s.url,
            page_score: s.page_score,
        })
        .collect()
}

fn score_job(scorer: &Scorer<'_>, job: &RankJob<'_>, query: &Query, profile: &TokenSet) -> Result<PageScore, ScoreError> {
    let req = ScoreRequest {
        query,
        profile,
        track: job.track,
    };
    scorer.score_page_sequential(job.snapshot, &req)
}

/// Scores every job, one page per task when `parallel` is enabled, and
/// ranks the results.
pub fn rank_pages(
    scorer: &Scorer<'_>,
    jobs: &[RankJob<'_>],
    query: &Query,
    profile: &TokenSet,
) -> Result<Vec<RankedPage>, ScoreError> {
    #[cfg(feature = "parallel")]
    let scores = {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|job| score_job(scorer, job, query, profile))
            .collect::<Result<Vec<_>, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let scores = jobs
        .iter()
        .map(|job| score_job(scorer, job, query, profile))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rank(scores))
}

pub fn rank_pages_sequential(
    scorer: &Scorer<'_>,
    jobs: &[RankJob<'_>],
    query: &Query,
    profile: &TokenSet,
) -> Result<Vec<RankedPage>, ScoreError> {
    let scores = jobs
        .iter()
        .map(|job| score_job(scorer, job, query, profile))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(rank(scores))
}
