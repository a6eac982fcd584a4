//! Keyword-triggered pattern matching, a deterministic stand-in for a neural
//! reader.
//!
//! A gazetteer row is `keywords<TAB>pattern`. The row applies to a question
//! whose lowercase word set contains every keyword. Patterns are regular
//! expressions extended with word-class macros:
//!
//! - `<Proper>`: a capitalized word, `<Proper>+` one or more of them
//! - `<Word>`: any word, `<Word>+` one or more
//! - `<Num>`: a number such as `45`, `3.5` or `10:30`, `<Num>+` several
//!
//! The answer is capture group 1 when the pattern has one; otherwise the text
//! from the first macro to the last is captured, and patterns without macros
//! answer with the whole match. Among all matches the longest answer wins,
//! ties going to the earliest.

use std::collections::HashSet;

use regex::Regex;
use thiserror::Error;

use super::{BackendConfig, BackendError, ExtractionResult, SpanExtractor};
use crate::text::char_offset;

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("gazetteer line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("gazetteer line {line}: bad pattern `{pattern}`: {source}")]
    Pattern {
        line: usize,
        pattern: String,
        #[source]
        source: Box<regex::Error>,
    },
}

const MACROS: &[(&str, &str)] = &[
    ("<Proper>+", r"[\p{Lu}][\p{L}\p{N}'&-]*(?:\s+[\p{Lu}][\p{L}\p{N}'&-]*)*"),
    ("<Proper>", r"[\p{Lu}][\p{L}\p{N}'&-]*"),
    ("<Word>+", r"[\p{L}\p{N}'$&-]+(?:\s+[\p{L}\p{N}'$&-]+)*"),
    ("<Word>", r"[\p{L}\p{N}'$&-]+"),
    ("<Num>+", r"\$?\d+(?:[.,:]\d+)*(?:\s+\$?\d+(?:[.,:]\d+)*)*"),
    ("<Num>", r"\$?\d+(?:[.,:]\d+)*"),
];

fn expand(pattern: &str) -> String {
    let mut out = String::with_capacity(pattern.len() * 2);
    let mut rest = pattern;
    'outer: while !rest.is_empty() {
        for (name, body) in MACROS {
            if let Some(tail) = rest.strip_prefix(name) {
                out.push_str("(?:");
                out.push_str(body);
                out.push(')');
                rest = tail;
                continue 'outer;
            }
        }
        let c = rest.chars().next().expect("non-empty");
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

/// Byte range in `pattern` from the first macro to the end of the last one.
fn macro_region(pattern: &str) -> Option<(usize, usize)> {
    let mut first = None;
    let mut last = None;
    let mut i = 0;
    while i < pattern.len() {
        if let Some((name, _)) = MACROS.iter().find(|(name, _)| pattern[i..].starts_with(name)) {
            first.get_or_insert(i);
            last = Some(i + name.len());
            i += name.len();
        } else {
            i += pattern[i..].chars().next().map_or(1, char::len_utf8);
        }
    }
    Some((first?, last?))
}

#[derive(Debug, Clone)]
struct Entry {
    keywords: Vec<String>,
    regex: Regex,
    group: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<Entry>,
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one row. `keywords` is a space-separated word list.
    pub fn add(&mut self, keywords: &str, pattern: &str) -> Result<(), regex::Error> {
        let plain = Regex::new(&expand(pattern))?;
        let (regex, group) = if plain.captures_len() > 1 {
            (plain, 1)
        } else if let Some((a, b)) = macro_region(pattern) {
            let wrapped = format!("{}({}){}", &pattern[..a], &pattern[a..b], &pattern[b..]);
            (Regex::new(&expand(&wrapped))?, 1)
        } else {
            (plain, 0)
        };
        self.entries.push(Entry {
            keywords: words(keywords).collect(),
            regex,
            group,
        });
        Ok(())
    }

    pub fn parse_tsv(text: &str) -> Result<Self, GazetteerError> {
        let mut g = Gazetteer::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((keywords, pattern)) = line.split_once('\t') else {
                return Err(GazetteerError::Parse {
                    line: i + 1,
                    message: "expected `keywords<TAB>pattern`".into(),
                });
            };
            if words(keywords).next().is_none() {
                return Err(GazetteerError::Parse {
                    line: i + 1,
                    message: "no keywords".into(),
                });
            }
            g.add(keywords, pattern.trim()).map_err(|source| GazetteerError::Pattern {
                line: i + 1,
                pattern: pattern.trim().to_string(),
                source: Box::new(source),
            })?;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Gazetteer-backed extractor.
#[derive(Debug, Clone, Default)]
pub struct LexicalBackend {
    gazetteer: Gazetteer,
}

impl LexicalBackend {
    pub fn new(gazetteer: Gazetteer) -> Self {
        LexicalBackend { gazetteer }
    }

    /// Longest matching span for the entries triggered by `question`, as
    /// byte offsets into `context`.
    fn best_span(&self, question: &str, context: &str) -> Option<(usize, usize)> {
        let qwords: HashSet<String> = words(question).collect();
        let mut best: Option<(usize, usize, usize)> = None; // (chars, start, end)
        for entry in &self.gazetteer.entries {
            if !entry.keywords.iter().all(|k| qwords.contains(k)) {
                continue;
            }
            for caps in entry.regex.captures_iter(context) {
                let Some(m) = caps.get(entry.group) else { continue };
                let (start, end) = (m.start(), m.end());
                let len = context[start..end].chars().count();
                if len == 0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bl, bs, _)) => len > bl || (len == bl && start < bs),
                };
                if better {
                    best = Some((len, start, end));
                }
            }
        }
        best.map(|(_, s, e)| (s, e))
    }
}

/// Free-function form of [`LexicalBackend::extract`].
pub fn lexical_extract(question: &str, context: &str, gazetteer: &Gazetteer) -> ExtractionResult {
    let backend = LexicalBackend {
        gazetteer: gazetteer.clone(),
    };
    backend
        .extract(question, context, &BackendConfig::default())
        .unwrap_or_else(|_| ExtractionResult::no_answer())
}

impl SpanExtractor for LexicalBackend {
    fn name(&self) -> &str {
        "lexical"
    }

    fn extract(&self, question: &str, context: &str, _cfg: &BackendConfig) -> Result<ExtractionResult, BackendError> {
        if context.is_empty() {
            return Err(BackendError::EmptyContext);
        }
        match self.best_span(question, context) {
            Some((bs, be)) => {
                let start = char_offset(context, bs);
                let end = char_offset(context, be);
                ExtractionResult::span(context, start, end, 1.0, 0.0).map_err(|reason| BackendError::ContractViolation {
                    item: question.to_string(),
                    reason,
                })
            }
            None => Ok(ExtractionResult::no_answer()),
        }
    }
}
