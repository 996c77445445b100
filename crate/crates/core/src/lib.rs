//! Segment-level web page relevance.
//!
//! Pages are split into non-overlapping DOM blocks ([`segmenter`]), kept as
//! timestamped snapshots per URL ([`evolution`], [`store`]) and scored per
//! block along six dimensions: freshness, theme, link, visual, profile and
//! image ([`scorer`]). The page score is the mean block score and can be
//! used to re-rank result lists ([`rank`]).

pub mod evolution;
pub mod lexicon;
pub mod model;
pub mod profile;
pub mod query;
pub mod rank;
pub mod scorer;
pub mod segmenter;
pub mod store;
pub mod weight;

pub use evolution::{EvolutionTrack, HistoryDepth};
pub use lexicon::{tokenize, SynonymLexicon, Token, TokenSet, Tokenizer};
pub use model::{Fingerprint, PageSnapshot, Segment, Timestamp};
pub use profile::UserProfile;
pub use query::Query;
pub use rank::{rank_pages, RankJob, RankedPage};
pub use scorer::{PageScore, ScoreError, ScoreRequest, Scorer, SegmentScore, VisualWeightTable};
pub use segmenter::{segment_page, RawPage, SegmentError, SegmenterConfig};
pub use store::{StoreError, TrackStore};
pub use weight::Weight;
