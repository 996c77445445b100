//! `museum.toml` loading.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use museum_core::{HistoryDepth, SegmenterConfig, SynonymLexicon, Tokenizer, VisualWeightTable, Weight};
use serde::Deserialize;

pub const DEFAULT_CONFIG: &str = "museum.toml";
pub const STORE_ENV: &str = "MUSEUM_STORE";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    store: StoreSection,
    #[serde(default)]
    segmenter: SegmenterSection,
    #[serde(default)]
    visual_weights: BTreeMap<String, toml::Value>,
    #[serde(default)]
    lexicon: PathSection,
    #[serde(default)]
    stopwords: PathSection,
    #[serde(default)]
    evolution: EvolutionSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreSection {
    root: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmenterSection {
    min_tokens: Option<usize>,
    block_elements: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathSection {
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvolutionSection {
    #[serde(default)]
    check_full_history: bool,
}

/// Resolved engine settings. Every path is absolute or relative to the
/// working directory.
#[derive(Debug)]
pub struct EngineConfig {
    pub store_root: Option<PathBuf>,
    pub segmenter: SegmenterConfig,
    pub visual: VisualWeightTable,
    pub tokenizer: Tokenizer,
    pub lexicon: SynonymLexicon,
    pub depth: HistoryDepth,
}

impl EngineConfig {
    /// Reads `path`. A missing file is only an error when it was asked
    /// for explicitly.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let (file, explicit) = match path {
            Some(p) => (p.to_owned(), true),
            None => (PathBuf::from(DEFAULT_CONFIG), false),
        };
        let raw = match fs::read_to_string(&file) {
            Ok(text) => toml::from_str(&text).with_context(|| format!("{}", file.display()))?,
            Err(e) if !explicit && e.kind() == std::io::ErrorKind::NotFound => RawConfig::default(),
            Err(e) => return Err(e).with_context(|| format!("cannot read config {}", file.display())),
        };
        let base = file.parent().map(Path::to_owned).unwrap_or_default();
        Self::resolve(raw, &base).with_context(|| format!("invalid config {}", file.display()))
    }

    fn resolve(raw: RawConfig, base: &Path) -> Result<Self> {
        let at = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let mut segmenter = SegmenterConfig::default();
        if let Some(n) = raw.segmenter.min_tokens {
            segmenter.min_tokens = n;
        }
        if let Some(tags) = raw.segmenter.block_elements {
            segmenter.block_elements = tags.into_iter().map(|t| t.to_ascii_lowercase()).collect();
        }

        let mut visual = VisualWeightTable::default();
        for (class, value) in raw.visual_weights {
            visual.set(&class, parse_weight(&class, &value)?);
        }

        let tokenizer = match raw.stopwords.path.map(at) {
            Some(p) => Tokenizer::load_stop_words(&p)?,
            None => Tokenizer::default(),
        };
        let lexicon = match raw.lexicon.path.map(at) {
            Some(p) => SynonymLexicon::load(&p, &tokenizer)?,
            None => SynonymLexicon::new(),
        };

        Ok(EngineConfig {
            store_root: raw.store.root.map(at),
            segmenter,
            visual,
            tokenizer,
            lexicon,
            depth: if raw.evolution.check_full_history {
                HistoryDepth::Full
            } else {
                HistoryDepth::MostRecent
            },
        })
    }
}

fn parse_weight(class: &str, value: &toml::Value) -> Result<Weight> {
    let parsed = match value {
        toml::Value::Integer(n) if *n >= 0 => Ok(Weight::from_integer(*n)),
        toml::Value::Integer(_) => bail!("visual weight `{class}` is negative"),
        toml::Value::Float(f) => Weight::try_from(*f).map_err(anyhow::Error::from),
        toml::Value::String(s) => s.parse::<Weight>().map_err(anyhow::Error::from),
        other => bail!("visual weight `{class}` must be a number or string, got {}", other.type_str()),
    };
    parsed.with_context(|| format!("visual weight `{class}`"))
}
