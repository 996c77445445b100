//! User profiles: flat keyword files.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::lexicon::{TokenSet, Tokenizer};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserProfile {
    pub profile_id: String,
    pub keywords: TokenSet,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile not found: {0}")]
    NotFound(String),
    #[error("{path}: {reason}")]
    Parse { path: String, reason: String },
}

impl UserProfile {
    /// The anonymous profile: no keywords, so profile weight is always 0.
    pub fn anonymous() -> Self {
        UserProfile {
            profile_id: "anonymous".into(),
            keywords: TokenSet::new(),
        }
    }

    pub fn from_keywords(id: impl Into<String>, text: &str, tokenizer: &Tokenizer) -> Self {
        let keywords = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.starts_with('#'))
            .flat_map(|l| tokenizer.tokenize(l))
            .collect();
        UserProfile {
            profile_id: id.into(),
            keywords,
        }
    }

    /// Loads a profile file: one keyword per line, `#` comments. The
    /// profile id is the file stem.
    pub fn load(path: &Path, tokenizer: &Tokenizer) -> Result<Self, ProfileError> {
        let display = path.display().to_string();
        let bytes = fs::read(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => ProfileError::NotFound(display.clone()),
            _ => ProfileError::Parse {
                path: display.clone(),
                reason: e.to_string(),
            },
        })?;
        let text = String::from_utf8(bytes).map_err(|e| ProfileError::Parse {
            path: display.clone(),
            reason: e.to_string(),
        })?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .filter(|s| !s.is_empty())
            .unwrap_or(display);
        Ok(UserProfile::from_keywords(id, &text, tokenizer))
    }
}
