use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use xxhash_rust::xxh3::xxh3_128;

use crate::lexicon::TokenSet;

/// Seconds since the Unix epoch, UTC. Always supplied by the caller.
pub type Timestamp = i64;

/// Stable 128-bit segment identifier: XXH3-128 over the dom path, a newline,
/// and the sorted tokens joined by newlines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint(pub u128);

impl Fingerprint {
    pub fn of(dom_path: &str, text_tokens: &TokenSet) -> Self {
        let mut buf = String::with_capacity(dom_path.len() + 8 * text_tokens.len() + 1);
        buf.push_str(dom_path);
        buf.push('\n');
        for (i, t) in text_tokens.iter().enumerate() {
            if i > 0 {
                buf.push('\n');
            }
            buf.push_str(t.as_str());
        }
        Fingerprint(xxh3_128(buf.as_bytes()))
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl FromStr for Fingerprint {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u128::from_str_radix(s, 16).map(Fingerprint)
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One block of a page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub fingerprint: Fingerprint,
    pub dom_path: String,
    pub text_tokens: TokenSet,
    pub link_tokens: TokenSet,
    pub image_alt_tokens: TokenSet,
    /// Markup class (`bold`, `h1`, ...) to the tokens emphasized by it.
    pub visual_spans: BTreeMap<String, TokenSet>,
}

impl Segment {
    /// Builds a segment and derives its fingerprint.
    pub fn new(
        dom_path: impl Into<String>,
        text_tokens: TokenSet,
        link_tokens: TokenSet,
        image_alt_tokens: TokenSet,
        visual_spans: BTreeMap<String, TokenSet>,
    ) -> Self {
        let dom_path = dom_path.into();
        Segment {
            fingerprint: Fingerprint::of(&dom_path, &text_tokens),
            dom_path,
            text_tokens,
            link_tokens,
            image_alt_tokens,
            visual_spans,
        }
    }

    pub fn fingerprint_is_consistent(&self) -> bool {
        self.fingerprint == Fingerprint::of(&self.dom_path, &self.text_tokens)
    }
}

/// A timestamped, segmented capture of one URL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSnapshot {
    pub url: String,
    pub captured_at: Timestamp,
    pub title_tokens: TokenSet,
    pub segments: Vec<Segment>,
}

impl PageSnapshot {
    pub fn segment(&self, fingerprint: Fingerprint) -> Option<&Segment> {
        self.segments.iter().find(|s| s.fingerprint == fingerprint)
    }
}

/// True when `ancestor` is a strict path-component prefix of `path`.
pub fn is_path_ancestor(ancestor: &str, path: &str) -> bool {
    path.len() > ancestor.len()
        && path.starts_with(ancestor)
        && path.as_bytes()[ancestor.len()] == b'/'
}
