use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::{AnnotatedUtterance, QaAnswer, QaExample, SlotSchema};
use crate::question::{AblationMode, Question, QuestionError, QuestionGenerator};
use crate::screen::{GuiCategory, GuiElement, Screen};

/// Which unanswerable questions accompany each utterance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NegativePolicy {
    /// One impossible question for every schema slot absent from the utterance.
    #[default]
    All,
    /// Up to `k` absent slots per utterance, drawn with a seeded generator.
    SampleK { k: usize, seed: u64 },
    None,
}

impl fmt::Display for NegativePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegativePolicy::All => f.write_str("all"),
            NegativePolicy::SampleK { k, .. } => write!(f, "sample:{k}"),
            NegativePolicy::None => f.write_str("none"),
        }
    }
}

impl FromStr for NegativePolicy {
    type Err = String;

    /// Parses `all`, `none` or `sample:K`. The sampling seed starts at 0;
    /// set it with [`NegativePolicy::with_seed`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(NegativePolicy::All),
            "none" => Ok(NegativePolicy::None),
            other => other
                .strip_prefix("sample:")
                .and_then(|k| k.parse().ok())
                .map(|k| NegativePolicy::SampleK { k, seed: 0 })
                .ok_or_else(|| format!("unknown negative policy `{s}` (expected all, none or sample:K)")),
        }
    }
}

impl NegativePolicy {
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            NegativePolicy::SampleK { k, .. } => NegativePolicy::SampleK { k, seed },
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error(transparent)]
    Question(#[from] QuestionError),
    #[error("utterance `{utterance}`: slot `{slot_id}` is not a visible slot of screen `{screen}`")]
    UnknownSlot {
        utterance: String,
        slot_id: String,
        screen: String,
    },
}

/// Question text per slot, plus the slots negatives are drawn from (in
/// order).
struct QuestionBank {
    by_tag: HashMap<String, Question>,
    negatives: Vec<String>,
}

impl QuestionBank {
    /// Every slot is a text field labelled with its description, numbered
    /// in schema order. Negatives come from `schema` only, never from the
    /// extra tags appended in `effective`.
    fn for_schema(
        schema: &SlotSchema,
        effective: &SlotSchema,
        generator: &QuestionGenerator,
        mode: AblationMode,
    ) -> Result<Self, QuestionError> {
        let mut by_tag = HashMap::with_capacity(effective.len());
        for (ordinal, (tag, desc)) in effective.iter().enumerate() {
            let element = GuiElement::new(tag, GuiCategory::TextField, desc, tag);
            by_tag.insert(tag.to_string(), generator.generate_question(&element, mode, ordinal)?);
        }
        Ok(QuestionBank {
            by_tag,
            negatives: schema.tags().map(str::to_string).collect(),
        })
    }

    /// The questions a screen asks about its visible elements.
    fn for_screen(screen: &Screen, generator: &QuestionGenerator, mode: AblationMode) -> Result<Self, QuestionError> {
        let questions = generator.generate_questions(screen, mode)?;
        let negatives = questions.iter().map(|q| q.slot_id.clone()).collect();
        Ok(QuestionBank {
            by_tag: questions.into_iter().map(|q| (q.slot_id.clone(), q)).collect(),
            negatives,
        })
    }

    fn text(&self, tag: &str) -> &str {
        &self.by_tag[tag].text
    }
}

/// Turns annotated utterances into SQuAD-style examples.
///
/// Each gold slot becomes one answerable example with id `{utterance}:{tag}`
/// whose question is the text-field question over the slot description. A
/// slot tagged twice in one utterance yields one example with two answers.
/// Negative examples follow in schema order. Tags missing from the schema are
/// humanized and numbered after the schema's own slots.
pub fn to_qa_examples(
    utts: &[AnnotatedUtterance],
    schema: &SlotSchema,
    generator: &QuestionGenerator,
    mode: AblationMode,
    negatives: NegativePolicy,
) -> Result<Vec<QaExample>, ConvertError> {
    let unknown: BTreeSet<&str> = utts
        .iter()
        .flat_map(|u| u.slots.iter().map(|s| s.slot_id.as_str()))
        .filter(|t| !schema.contains(t))
        .collect();
    let effective = schema.extended(unknown);
    let bank = QuestionBank::for_schema(schema, &effective, generator, mode)?;
    Ok(convert_all(utts, &bank, negatives))
}

/// Like [`to_qa_examples`], but questions come from the screen's own
/// elements (so radio buttons and text buttons keep their templates). Every
/// gold slot must be a visible slot of `screen`; negatives are drawn from the
/// visible slots in element order.
pub fn screen_qa_examples(
    utts: &[AnnotatedUtterance],
    screen: &Screen,
    generator: &QuestionGenerator,
    mode: AblationMode,
    negatives: NegativePolicy,
) -> Result<Vec<QaExample>, ConvertError> {
    let bank = QuestionBank::for_screen(screen, generator, mode)?;
    for u in utts {
        if let Some(s) = u.slots.iter().find(|s| !bank.by_tag.contains_key(&s.slot_id)) {
            return Err(ConvertError::UnknownSlot {
                utterance: u.utterance_id.clone(),
                slot_id: s.slot_id.clone(),
                screen: screen.screen_id().to_string(),
            });
        }
    }
    Ok(convert_all(utts, &bank, negatives))
}

fn convert_all(utts: &[AnnotatedUtterance], bank: &QuestionBank, negatives: NegativePolicy) -> Vec<QaExample> {
    let per_utterance: Vec<Vec<QaExample>> = utts
        .par_iter()
        .enumerate()
        .map(|(i, u)| convert_one(i, u, bank, negatives))
        .collect();
    per_utterance.into_iter().flatten().collect()
}

fn convert_one(position: usize, u: &AnnotatedUtterance, bank: &QuestionBank, negatives: NegativePolicy) -> Vec<QaExample> {
    // One example per slot; a repeated slot lists every occurrence.
    let mut out: Vec<QaExample> = Vec::new();
    let mut at: HashMap<&str, usize> = HashMap::new();
    for fill in &u.slots {
        let answer = QaAnswer {
            text: fill.surface.clone(),
            answer_start: fill.start_char,
        };
        match at.get(fill.slot_id.as_str()) {
            Some(&i) => out[i].answers.push(answer),
            None => {
                at.insert(&fill.slot_id, out.len());
                out.push(QaExample::answerable(
                    format!("{}:{}", u.utterance_id, fill.slot_id),
                    bank.text(&fill.slot_id),
                    &u.text,
                    answer.text,
                    answer.answer_start,
                ));
            }
        }
    }

    let present: HashSet<&str> = u.slots.iter().map(|s| s.slot_id.as_str()).collect();
    let absent: Vec<&str> = bank
        .negatives
        .iter()
        .map(String::as_str)
        .filter(|t| !present.contains(t))
        .collect();
    let chosen: Vec<&str> = match negatives {
        NegativePolicy::None => Vec::new(),
        NegativePolicy::All => absent,
        NegativePolicy::SampleK { k, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(position as u64);
            let mut picks = index::sample(&mut rng, absent.len(), k.min(absent.len())).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|i| absent[i]).collect()
        }
    };
    for tag in chosen {
        out.push(QaExample::impossible(
            format!("{}:{}", u.utterance_id, tag),
            bank.text(tag),
            &u.text,
        ));
    }
    out
}
