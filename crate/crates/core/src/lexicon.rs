//! Token normalization and the synonym lexicon.
//!
//! Every set intersection in the engine runs over tokens produced by
//! [`Tokenizer::tokenize`], so documents, queries, titles, profiles and
//! lexicon entries all share one normal form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default English stop-word list.
pub const DEFAULT_STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

/// A normalized term: non-empty, case-folded, no whitespace, no leading or
/// trailing punctuation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Normalizes a single word. Returns `None` when nothing survives
    /// trimming. Stop words are not filtered here.
    pub fn normalize(word: &str) -> Option<Token> {
        let folded = word.to_lowercase();
        let trimmed = folded.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() || trimmed.chars().any(char::is_whitespace) {
            return None;
        }
        Some(Token(trimmed.to_owned()))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub type TokenSet = BTreeSet<Token>;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("self-synonym entry for token `{0}`")]
    SelfSynonym(Token),
}

/// Splits text into normalized tokens and drops stop words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenizer {
    stop_words: BTreeSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::with_stop_words(DEFAULT_STOP_WORDS.iter().copied())
    }
}

impl Tokenizer {
    pub fn with_stop_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let stop_words = words
            .into_iter()
            .filter_map(|w| Token::normalize(w.as_ref()))
            .map(|t| t.0)
            .collect();
        Tokenizer { stop_words }
    }

    /// Loads a stop-word file: one word per line, `#` comments allowed.
    pub fn load_stop_words(path: &Path) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        Ok(Tokenizer::with_stop_words(words))
    }

    pub fn is_stop_word(&self, token: &Token) -> bool {
        self.stop_words.contains(token.as_str())
    }

    pub fn tokenize(&self, text: &str) -> Vec<Token> {
        text.split_whitespace()
            .filter_map(Token::normalize)
            .filter(|t| !self.is_stop_word(t))
            .collect()
    }

    pub fn token_set(&self, text: &str) -> TokenSet {
        self.tokenize(text).into_iter().collect()
    }
}

/// Tokenizes with the default stop-word list.
pub fn tokenize(text: &str) -> Vec<Token> {
    Tokenizer::default().tokenize(text)
}

/// Term to synonym-set mapping. Immutable once loaded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    entries: BTreeMap<Token, TokenSet>,
}

impl SynonymLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds synonyms for `term`, merging with any existing entry.
    pub fn insert<I>(&mut self, term: Token, synonyms: I) -> Result<(), LexiconError>
    where
        I: IntoIterator<Item = Token>,
    {
        let set: TokenSet = synonyms.into_iter().collect();
        if set.contains(&term) {
            return Err(LexiconError::SelfSynonym(term));
        }
        self.entries.entry(term).or_default().extend(set);
        Ok(())
    }

    /// Builds a lexicon from raw pairs, normalizing every word.
    pub fn from_pairs<'a, I, J>(pairs: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = (&'a str, J)>,
        J: IntoIterator<Item = &'a str>,
    {
        let mut lexicon = SynonymLexicon::new();
        for (line, (term, syns)) in pairs.into_iter().enumerate() {
            let term = Token::normalize(term).ok_or_else(|| LexiconError::Parse {
                line: line + 1,
                reason: format!("term `{term}` normalizes to nothing"),
            })?;
            lexicon.insert(term, syns.into_iter().filter_map(Token::normalize))?;
        }
        Ok(lexicon)
    }

    pub fn load(path: &Path, tokenizer: &Tokenizer) -> Result<Self, LexiconError> {
        let text = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, tokenizer)
    }

    /// Parses the TSV format: `term<TAB>syn1,syn2,...`, `#` comments.
    pub fn parse(text: &str, tokenizer: &Tokenizer) -> Result<Self, LexiconError> {
        let mut lexicon = SynonymLexicon::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let (term, syns) = raw.split_once('\t').ok_or_else(|| LexiconError::Parse {
                line,
                reason: "missing TAB between term and synonyms".into(),
            })?;
            let term = single_token(term, tokenizer, line)?.ok_or_else(|| LexiconError::Parse {
                line,
                reason: format!("term `{}` is empty or a stop word", term.trim()),
            })?;
            let mut set = TokenSet::new();
            for syn in syns.split(',') {
                if let Some(tok) = single_token(syn, tokenizer, line)? {
                    set.insert(tok);
                }
            }
            lexicon.insert(term, set)?;
        }
        Ok(lexicon)
    }

    /// syn(term): the synonyms of `term`, empty when absent.
    pub fn syn(&self, term: &Token) -> &TokenSet {
        static EMPTY: TokenSet = TokenSet::new();
        self.entries.get(term).unwrap_or(&EMPTY)
    }

    /// syn over a set: the union of syn(t) for every member.
    pub fn syn_all<'a, I>(&self, terms: I) -> TokenSet
    where
        I: IntoIterator<Item = &'a Token>,
    {
        terms
            .into_iter()
            .flat_map(|t| self.syn(t).iter().cloned())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn single_token(
    raw: &str,
    tokenizer: &Tokenizer,
    line: usize,
) -> Result<Option<Token>, LexiconError> {
    let mut toks = tokenizer.tokenize(raw);
    match toks.len() {
        0 => Ok(None),
        1 => Ok(toks.pop()),
        _ => Err(LexiconError::Parse {
            line,
            reason: format!("`{}` is more than one token", raw.trim()),
        }),
    }
}
