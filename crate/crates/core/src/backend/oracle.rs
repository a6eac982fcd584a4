use std::collections::HashMap;

use super::{BackendConfig, BackendError, ExtractionResult, SpanExtractor};
use crate::dataset::QaExample;
use crate::text::{char_len, find_char_offsets};

/// Answers from a gold table keyed by (context, question). Anything not in
/// the table is rejected with `no_answer_score = 1.0`.
#[derive(Debug, Clone, Default)]
pub struct GoldOracle {
    gold: HashMap<(String, String), (usize, usize)>,
}

impl GoldOracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Uses the first answer of every answerable example. Impossible
    /// examples add nothing.
    pub fn from_examples(examples: &[QaExample]) -> Self {
        let mut oracle = GoldOracle::new();
        for e in examples {
            if let Some(a) = e.answers.first() {
                let end = a.answer_start + char_len(&a.text);
                oracle
                    .gold
                    .entry((e.context.clone(), e.question.clone()))
                    .or_insert((a.answer_start, end));
            }
        }
        oracle
    }

    /// Registers `answer` at its first occurrence in `context`.
    pub fn insert(&mut self, context: &str, question: &str, answer: &str) -> Result<(), BackendError> {
        let start = *find_char_offsets(context, answer)
            .first()
            .ok_or_else(|| BackendError::ContractViolation {
                item: question.to_string(),
                reason: format!("`{answer}` does not occur in the context"),
            })?;
        self.gold
            .insert((context.to_string(), question.to_string()), (start, start + char_len(answer)));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }
}

impl SpanExtractor for GoldOracle {
    fn name(&self) -> &str {
        "oracle"
    }

    fn extract(&self, question: &str, context: &str, _cfg: &BackendConfig) -> Result<ExtractionResult, BackendError> {
        if context.is_empty() {
            return Err(BackendError::EmptyContext);
        }
        match self.gold.get(&(context.to_string(), question.to_string())) {
            Some(&(start, end)) => ExtractionResult::span(context, start, end, 1.0, 0.0).map_err(|reason| {
                BackendError::ContractViolation {
                    item: question.to_string(),
                    reason,
                }
            }),
            None => Ok(ExtractionResult::no_answer()),
        }
    }
}
