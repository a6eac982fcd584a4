//! Span extraction: given a question and a context, return the answer span
//! or decline.
//!
//! Three implementations ship with the crate. [`GoldOracle`] answers from
//! gold annotations and is the reference for end-to-end tests.
//! [`LexicalBackend`] matches keyword-triggered regular expressions.
//! [`RemoteBackend`] talks to a model server over HTTP.

mod lexical;
mod oracle;
mod remote;

pub use lexical::{lexical_extract, Gazetteer, GazetteerError, LexicalBackend};
pub use oracle::GoldOracle;
pub use remote::{HealthStatus, RemoteBackend};

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::slice_chars;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    pub start_char: usize,
    pub end_char: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub answer: Option<Answer>,
    pub span_score: f64,
    pub no_answer_score: f64,
}

impl ExtractionResult {
    pub fn no_answer() -> Self {
        ExtractionResult {
            answer: None,
            span_score: 0.0,
            no_answer_score: 1.0,
        }
    }

    /// A result for the character span `start..end` of `context`.
    pub fn span(
        context: &str,
        start: usize,
        end: usize,
        span_score: f64,
        no_answer_score: f64,
    ) -> Result<Self, String> {
        let text = slice_chars(context, start, end).ok_or_else(|| format!("span {start}..{end} is outside the context"))?;
        let r = ExtractionResult {
            answer: Some(Answer {
                text: text.to_string(),
                start_char: start,
                end_char: end,
            }),
            span_score,
            no_answer_score,
        };
        r.check(context)?;
        Ok(r)
    }

    /// Checks the answer against `context` and the score ranges.
    pub fn check(&self, context: &str) -> Result<(), String> {
        for (name, score) in [("span_score", self.span_score), ("no_answer_score", self.no_answer_score)] {
            if !score.is_finite() || !(0.0..=1.0).contains(&score) {
                return Err(format!("{name} {score} is not in [0, 1]"));
            }
        }
        if let Some(a) = &self.answer {
            if a.end_char <= a.start_char {
                return Err(format!("empty span {}..{}", a.start_char, a.end_char));
            }
            if slice_chars(context, a.start_char, a.end_char) != Some(a.text.as_str()) {
                return Err(format!(
                    "answer `{}` does not match the context at {}..{}",
                    a.text, a.start_char, a.end_char
                ));
            }
        }
        Ok(())
    }

    /// The answer unless rejected: a question is rejected when no span was
    /// returned or `no_answer_score >= threshold`.
    pub fn accepted(&self, threshold: f64) -> Option<&Answer> {
        match &self.answer {
            Some(a) if self.no_answer_score < threshold => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    /// Rejection threshold τ on the no-answer score.
    pub no_answer_threshold: f64,
    pub batch_size: usize,
    pub endpoint: Option<String>,
    pub timeout_ms: u64,
    pub retries: u32,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            no_answer_threshold: 0.5,
            batch_size: 32,
            endpoint: None,
            timeout_ms: 30_000,
            retries: 2,
        }
    }
}

impl BackendConfig {
    pub fn with_threshold(mut self, tau: f64) -> Self {
        self.no_answer_threshold = tau;
        self
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(0.0..=1.0).contains(&self.no_answer_threshold) {
            return Err(BackendError::InvalidConfig(format!(
                "no-answer threshold {} is outside [0, 1]",
                self.no_answer_threshold
            )));
        }
        if self.batch_size == 0 {
            return Err(BackendError::InvalidConfig("batch size must be positive".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    /// The backend returned an answer that breaks the span contract. Callers
    /// treat the question as unanswered.
    #[error("backend contract violation for item `{item}`: {reason}")]
    ContractViolation { item: String, reason: String },
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("empty context")]
    EmptyContext,
}

/// Anything that can answer extractive questions.
pub trait SpanExtractor: Send + Sync {
    fn name(&self) -> &str;

    fn extract(&self, question: &str, context: &str, cfg: &BackendConfig) -> Result<ExtractionResult, BackendError>;

    /// Results in input order; one failure does not abort the rest.
    fn batch_extract(
        &self,
        pairs: &[(&str, &str)],
        cfg: &BackendConfig,
    ) -> Vec<Result<ExtractionResult, BackendError>> {
        pairs.iter().map(|(q, c)| self.extract(q, c, cfg)).collect()
    }
}

impl<T: SpanExtractor + ?Sized> SpanExtractor for Box<T> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn extract(&self, question: &str, context: &str, cfg: &BackendConfig) -> Result<ExtractionResult, BackendError> {
        (**self).extract(question, context, cfg)
    }

    fn batch_extract(
        &self,
        pairs: &[(&str, &str)],
        cfg: &BackendConfig,
    ) -> Vec<Result<ExtractionResult, BackendError>> {
        (**self).batch_extract(pairs, cfg)
    }
}
