//! Slot-annotated corpora and their conversion to SQuAD v2 question answering
//! data.

mod bio;
mod convert;
mod sampling;
mod schema;
mod squad;

pub use bio::{parse_bio_corpus, parse_bio_str, read_bio_file, render_conll, BioError, BioOptions};
pub use convert::{screen_qa_examples, to_qa_examples, ConvertError, NegativePolicy};
pub use sampling::{
    sample_few_shot, sample_indices, sample_stratified, slot_coverage, train_test_split, SlotCoverage,
};
pub use schema::{humanize_tag, strip_bio_prefix, tag_to_description, SchemaError, SlotSchema};
pub use squad::{export_squad, import_squad, read_squad, write_squad, QaAnswer, QaExample, SquadError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{slice_chars, whitespace_tokens};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Character offset into the utterance text.
    pub start: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.start + self.text.chars().count()
    }
}

/// A gold slot value: half-open character span over the utterance text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotFill {
    pub slot_id: String,
    pub start_char: usize,
    pub end_char: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedUtterance {
    pub utterance_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
    pub slots: Vec<SlotFill>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UtteranceError {
    #[error("utterance `{id}`: token {index} `{token}` does not match the text at offset {start}")]
    TokenMismatch {
        id: String,
        index: usize,
        token: String,
        start: usize,
    },
    #[error("utterance `{id}`: token offsets are not strictly increasing at token {index}")]
    TokenOrder { id: String, index: usize },
    #[error("utterance `{id}`: slot `{slot}` span {start}..{end} is outside the text or not token-aligned")]
    SlotSpan {
        id: String,
        slot: String,
        start: usize,
        end: usize,
    },
    #[error("utterance `{id}`: slot `{slot}` surface `{surface}` differs from the text span")]
    SlotSurface { id: String, slot: String, surface: String },
    #[error("utterance `{id}`: slots `{first}` and `{second}` overlap")]
    SlotOverlap { id: String, first: String, second: String },
}

impl AnnotatedUtterance {
    /// Tokenizes `text` on whitespace and attaches slots given as character
    /// spans, validating every invariant.
    pub fn from_text(
        utterance_id: impl Into<String>,
        text: impl Into<String>,
        slots: Vec<(String, usize, usize)>,
    ) -> Result<Self, UtteranceError> {
        let text = text.into();
        let tokens = whitespace_tokens(&text)
            .into_iter()
            .map(|t| Token {
                text: t.text.to_string(),
                start: t.start,
            })
            .collect();
        let slots = slots
            .into_iter()
            .map(|(slot_id, start_char, end_char)| SlotFill {
                surface: slice_chars(&text, start_char, end_char).unwrap_or_default().to_string(),
                slot_id,
                start_char,
                end_char,
            })
            .collect();
        let utt = AnnotatedUtterance {
            utterance_id: utterance_id.into(),
            text,
            tokens,
            slots,
        };
        utt.validate()?;
        Ok(utt)
    }

    pub fn validate(&self) -> Result<(), UtteranceError> {
        let id = || self.utterance_id.clone();
        let mut prev_end: Option<usize> = None;
        for (index, tok) in self.tokens.iter().enumerate() {
            if prev_end.is_some_and(|e| tok.start <= e) || tok.text.is_empty() {
                return Err(UtteranceError::TokenOrder { id: id(), index });
            }
            if slice_chars(&self.text, tok.start, tok.end()) != Some(tok.text.as_str()) {
                return Err(UtteranceError::TokenMismatch {
                    id: id(),
                    index,
                    token: tok.text.clone(),
                    start: tok.start,
                });
            }
            prev_end = Some(tok.end());
        }
        for slot in &self.slots {
            let aligned = slot.end_char > slot.start_char
                && self.tokens.iter().any(|t| t.start == slot.start_char)
                && self.tokens.iter().any(|t| t.end() == slot.end_char);
            if !aligned {
                return Err(UtteranceError::SlotSpan {
                    id: id(),
                    slot: slot.slot_id.clone(),
                    start: slot.start_char,
                    end: slot.end_char,
                });
            }
            if slice_chars(&self.text, slot.start_char, slot.end_char) != Some(slot.surface.as_str()) {
                return Err(UtteranceError::SlotSurface {
                    id: id(),
                    slot: slot.slot_id.clone(),
                    surface: slot.surface.clone(),
                });
            }
        }
        let mut spans: Vec<&SlotFill> = self.slots.iter().collect();
        spans.sort_by_key(|s| s.start_char);
        for pair in spans.windows(2) {
            if pair[1].start_char < pair[0].end_char {
                return Err(UtteranceError::SlotOverlap {
                    id: id(),
                    first: pair[0].slot_id.clone(),
                    second: pair[1].slot_id.clone(),
                });
            }
        }
        Ok(())
    }

    /// BIO tag per token.
    pub fn token_tags(&self) -> Vec<String> {
        let mut tags = vec!["O".to_string(); self.tokens.len()];
        for slot in &self.slots {
            let mut first = true;
            for (tag, tok) in tags.iter_mut().zip(&self.tokens) {
                if tok.start >= slot.start_char && tok.end() <= slot.end_char {
                    *tag = format!("{}-{}", if first { "B" } else { "I" }, slot.slot_id);
                    first = false;
                }
            }
        }
        tags
    }

    /// Distinct slot ids in first-occurrence order.
    pub fn slot_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.slots {
            if !out.contains(&s.slot_id.as_str()) {
                out.push(&s.slot_id);
            }
        }
        out
    }
}
