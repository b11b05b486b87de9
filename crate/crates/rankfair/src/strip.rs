//! Reduces a translated carrier sentence to the bare job title.
//!
//! Rules are ordered regular expressions per language, matched against the
//! lowercased sentence. The first matching prefix is removed, then
//! surrounding whitespace and terminal punctuation, then the first matching
//! suffix. Anything still looking like scaffold is reported instead of guessed at.

use std::collections::BTreeMap;

use regex::Regex;
use serde::Deserialize;

/// Rules shipped for es, de, fr, pt and en.
pub const DEFAULT_RULES: &str = include_str!("../data/strip_rules.json");

const TERMINAL: &[char] = &['.', '!', '?', ';', ',', ':', '…', '"', '\'', '«', '»', '“', '”'];

fn trim(text: &str) -> &str {
    text.trim_matches(|c: char| c.is_whitespace() || TERMINAL.contains(&c))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StripError {
    #[error("nothing left of {input:?} after stripping")]
    Empty { input: String },
    #[error("unrecognized scaffold in {input:?} (left {output:?})")]
    Scaffold { input: String, output: String },
    #[error("no strip rules for language {0:?}")]
    UnknownLanguage(String),
    #[error("bad strip rule {pattern:?}: {message}")]
    BadPattern { pattern: String, message: String },
    #[error("strip rules file: {0}")]
    Parse(String),
}

#[derive(Debug, Deserialize)]
struct RawRules {
    #[serde(default)]
    prefixes: Vec<String>,
    #[serde(default)]
    suffixes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct StripRules {
    language: String,
    prefixes: Vec<Regex>,
    suffixes: Vec<Regex>,
}

fn compile(patterns: &[String]) -> Result<Vec<Regex>, StripError> {
    patterns
        .iter()
        .map(|p| {
            Regex::new(p).map_err(|e| StripError::BadPattern {
                pattern: p.clone(),
                message: e.to_string(),
            })
        })
        .collect()
}

impl StripRules {
    /// Rules for `language` from a JSON object keyed by language code.
    pub fn from_json(json: &str, language: &str) -> Result<Self, StripError> {
        let mut all: BTreeMap<String, RawRules> =
            serde_json::from_str(json).map_err(|e| StripError::Parse(e.to_string()))?;
        let raw = all
            .remove(language)
            .ok_or_else(|| StripError::UnknownLanguage(language.to_string()))?;
        Ok(Self {
            language: language.to_string(),
            prefixes: compile(&raw.prefixes)?,
            suffixes: compile(&raw.suffixes)?,
        })
    }

    pub fn builtin(language: &str) -> Result<Self, StripError> {
        Self::from_json(DEFAULT_RULES, language)
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn strip_and_normalize(&self, translated: &str) -> Result<String, StripError> {
        let lowered = translated.trim().to_lowercase();
        let mut text = lowered.as_str();
        if let Some(m) = self.prefixes.iter().find_map(|r| r.find(text)) {
            text = &text[m.end()..];
        }
        text = trim(text);
        if let Some(m) = self.suffixes.iter().find_map(|r| r.find(text)) {
            text = trim(&text[..m.start()]);
        }
        if text.is_empty() {
            return Err(StripError::Empty {
                input: translated.to_string(),
            });
        }
        if text.contains(':') || text.contains(rankfair_core::model::PLACEHOLDER) {
            return Err(StripError::Scaffold {
                input: translated.to_string(),
                output: text.to_string(),
            });
        }
        Ok(text.to_string())
    }
}
