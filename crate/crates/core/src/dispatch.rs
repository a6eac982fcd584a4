//! End-to-end slot filling: ask every visible element's question about one
//! utterance, apply the rejection rule, and report token-aligned fills.
//!
//! The first screen is the target; the rest are distractors whose slots must
//! be rejected. Slot keys are the elements' slot ids; a distractor slot whose
//! id is already taken is reported as `{screen_id}/{slot_id}`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendConfig, BackendError, SpanExtractor};
use crate::dataset::AnnotatedUtterance;
use crate::question::{AblationMode, Question, QuestionError, QuestionGenerator};
use crate::screen::{visible_elements, Screen};
use crate::text::{char_len, slice_chars, whitespace_tokens};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub surface: String,
    pub start_char: usize,
    pub end_char: usize,
    /// Half-open whitespace-token window.
    pub token_start: usize,
    pub token_end: usize,
    pub span_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotFillResult {
    pub utterance_id: String,
    pub fills: BTreeMap<String, Fill>,
    pub rejections: BTreeMap<String, f64>,
    /// Pairs of filled slots whose spans overlap. Nothing is arbitrated.
    pub conflicts: Vec<(String, String)>,
    pub mode: AblationMode,
    /// Visible elements beyond the target screen.
    pub distractor_count: usize,
    /// Every question asked, keyed by reported slot.
    pub questions: BTreeMap<String, String>,
}

impl SlotFillResult {
    pub fn n_questions(&self) -> usize {
        self.questions.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("span {start}..{end} does not fit an utterance of {len} characters")]
pub struct SpanOutOfRange {
    pub start: usize,
    pub end: usize,
    pub len: usize,
}

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("no screens given; the first screen is the target")]
    NoScreens,
    #[error(transparent)]
    Question(#[from] QuestionError),
    #[error(transparent)]
    Config(BackendError),
    #[error("backend failed on slot `{slot_id}` (question `{question}`): {source}")]
    Backend {
        slot_id: String,
        question: String,
        #[source]
        source: BackendError,
    },
    #[error("slot `{slot_id}`: {source}")]
    Align {
        slot_id: String,
        #[source]
        source: SpanOutOfRange,
    },
}

/// Minimal half-open window of whitespace tokens covering the character span
/// `start..end`. Tokens that overlap the span only partly are included whole.
pub fn align_to_tokens(utterance: &str, (start, end): (usize, usize)) -> Result<(usize, usize), SpanOutOfRange> {
    let len = char_len(utterance);
    let err = SpanOutOfRange { start, end, len };
    if end <= start || end > len {
        return Err(err);
    }
    let tokens = whitespace_tokens(utterance);
    let first = tokens.iter().position(|t| t.end > start);
    let last = tokens.iter().rposition(|t| t.start < end);
    match (first, last) {
        (Some(a), Some(b)) if a <= b => Ok((a, b + 1)),
        _ => Err(err),
    }
}

/// A backend plus the settings for asking it about screens.
pub struct SlotFiller<'a> {
    backend: &'a dyn SpanExtractor,
    cfg: BackendConfig,
    generator: QuestionGenerator,
}

impl<'a> SlotFiller<'a> {
    pub fn new(backend: &'a dyn SpanExtractor, cfg: BackendConfig) -> Self {
        SlotFiller {
            backend,
            cfg,
            generator: QuestionGenerator::default(),
        }
    }

    pub fn with_generator(mut self, generator: QuestionGenerator) -> Self {
        self.generator = generator;
        self
    }

    pub fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    pub fn generator(&self) -> &QuestionGenerator {
        &self.generator
    }

    /// Questions for `screens` in screen order, keyed by reported slot.
    /// No-visuals tag ordinals continue across screens.
    pub fn questions(&self, screens: &[Screen], mode: AblationMode) -> Result<Vec<(String, Question)>, DispatchError> {
        let mut out = Vec::new();
        let mut taken = HashSet::new();
        let mut offset = 0;
        for screen in screens {
            for q in self.generator.generate_questions_offset(screen, mode, offset)? {
                let mut key = q.slot_id.clone();
                if taken.contains(&key) {
                    key = format!("{}/{}", screen.screen_id(), q.slot_id);
                }
                let mut n = 2;
                while taken.contains(&key) {
                    key = format!("{}/{}#{n}", screen.screen_id(), q.slot_id);
                    n += 1;
                }
                taken.insert(key.clone());
                out.push((key, q));
            }
            offset += screen.elements().len();
        }
        Ok(out)
    }

    pub fn fill_slots(&self, screens: &[Screen], utterance: &str, mode: AblationMode) -> Result<SlotFillResult, DispatchError> {
        self.fill(screens, "", utterance, mode)
    }

    pub fn fill_utterance(
        &self,
        screens: &[Screen],
        utterance: &AnnotatedUtterance,
        mode: AblationMode,
    ) -> Result<SlotFillResult, DispatchError> {
        self.fill(screens, &utterance.utterance_id, &utterance.text, mode)
    }

    fn fill(&self, screens: &[Screen], id: &str, utterance: &str, mode: AblationMode) -> Result<SlotFillResult, DispatchError> {
        let (_, distractors) = screens.split_first().ok_or(DispatchError::NoScreens)?;
        self.cfg.validate().map_err(DispatchError::Config)?;
        let questions = self.questions(screens, mode)?;
        let mut result = SlotFillResult {
            utterance_id: id.to_string(),
            fills: BTreeMap::new(),
            rejections: BTreeMap::new(),
            conflicts: Vec::new(),
            mode,
            distractor_count: distractors.iter().map(|s| visible_elements(s).len()).sum(),
            questions: questions.iter().map(|(k, q)| (k.clone(), q.text.clone())).collect(),
        };
        if questions.is_empty() {
            return Ok(result);
        }
        if utterance.trim().is_empty() {
            for (key, _) in questions {
                result.rejections.insert(key, 1.0);
            }
            return Ok(result);
        }

        let pairs: Vec<(&str, &str)> = questions.iter().map(|(_, q)| (q.text.as_str(), utterance)).collect();
        let answers = self.backend.batch_extract(&pairs, &self.cfg);
        let tau = self.cfg.no_answer_threshold;
        for ((key, q), answer) in questions.iter().zip(answers) {
            let r = match answer {
                Ok(r) => r,
                Err(BackendError::ContractViolation { item, reason }) => {
                    log::warn!("{}: discarding answer to `{item}` for slot `{key}`: {reason}", self.backend.name());
                    result.rejections.insert(key.clone(), 1.0);
                    continue;
                }
                Err(source) => {
                    return Err(DispatchError::Backend {
                        slot_id: key.clone(),
                        question: q.text.clone(),
                        source,
                    })
                }
            };
            // Backends are not trusted to have checked their own output.
            if let Err(reason) = r.check(utterance) {
                log::warn!("{}: discarding answer for slot `{key}`: {reason}", self.backend.name());
                result.rejections.insert(key.clone(), 1.0);
                continue;
            }
            match r.accepted(tau) {
                Some(a) => {
                    let (ts, te) = align_to_tokens(utterance, (a.start_char, a.end_char)).map_err(|source| {
                        DispatchError::Align {
                            slot_id: key.clone(),
                            source,
                        }
                    })?;
                    let tokens = whitespace_tokens(utterance);
                    let (start, end) = (tokens[ts].start, tokens[te - 1].end);
                    result.fills.insert(
                        key.clone(),
                        Fill {
                            surface: slice_chars(utterance, start, end).expect("token bounds").to_string(),
                            start_char: start,
                            end_char: end,
                            token_start: ts,
                            token_end: te,
                            span_score: r.span_score,
                        },
                    );
                }
                None => {
                    result.rejections.insert(key.clone(), r.no_answer_score);
                }
            }
        }

        let filled: Vec<(&String, &Fill)> = result.fills.iter().collect();
        for (i, (ka, fa)) in filled.iter().enumerate() {
            for (kb, fb) in &filled[i + 1..] {
                if fa.start_char < fb.end_char && fb.start_char < fa.end_char {
                    result.conflicts.push(((*ka).clone(), (*kb).clone()));
                }
            }
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ExtractionResult, GoldOracle};
    use crate::bundled;

    const PERSONAL: &str = "Please log this trip as Personal";

    fn personal_oracle() -> GoldOracle {
        let mut o = GoldOracle::new();
        o.insert(PERSONAL, "Is this Business, Personal or Other?", "Personal").unwrap();
        o
    }

    #[test]
    fn alignment() {
        let u = "I am flying from San Jose";
        assert_eq!(align_to_tokens(u, (17, 25)), Ok((4, 6)));
        assert_eq!(align_to_tokens(u, (0, 1)), Ok((0, 1)));
        assert_eq!(align_to_tokens(u, (18, 23)), Ok((4, 6)));
        assert_eq!(align_to_tokens(u, (16, 17)).map_err(|e| e.len), Err(25));
        assert!(align_to_tokens(u, (3, 3)).is_err());
        assert!(align_to_tokens(u, (20, 40)).is_err());
    }

    #[test]
    fn trip_type_is_filled_and_the_rest_rejected() {
        let oracle = personal_oracle();
        let filler = SlotFiller::new(&oracle, BackendConfig::default());
        let r = filler.fill_slots(&[bundled::vehicle_logger()], PERSONAL, AblationMode::Full).unwrap();
        assert_eq!(r.fills.len(), 1);
        assert_eq!(r.fills["trip_type"].surface, "Personal");
        assert_eq!(r.rejections.len(), 9);
        assert_eq!(r.distractor_count, 0);
        assert!(r.conflicts.is_empty());
    }

    #[test]
    fn distractors_do_not_change_target_fills() {
        let oracle = personal_oracle();
        let filler = SlotFiller::new(&oracle, BackendConfig::default());
        let alone = filler.fill_slots(&[bundled::vehicle_logger()], PERSONAL, AblationMode::Full).unwrap();
        let crowd = [bundled::vehicle_logger(), bundled::united(), bundled::trip_advisor()];
        let with = filler.fill_slots(&crowd, PERSONAL, AblationMode::Full).unwrap();
        assert_eq!(with.fills, alone.fills);
        assert_eq!(with.distractor_count, 12);
        assert_eq!(with.fills.len() + with.rejections.len(), 22);
    }

    #[test]
    fn colliding_distractor_slots_are_prefixed() {
        let oracle = GoldOracle::new();
        let filler = SlotFiller::new(&oracle, BackendConfig::default());
        let vl = bundled::vehicle_logger();
        let r = filler.fill_slots(&[vl.clone(), vl], "hello", AblationMode::NoVisuals).unwrap();
        assert_eq!(r.rejections.len(), 20);
        assert!(r.rejections.contains_key("vehicle_logger.main/trip_type"));
        assert_eq!(r.questions["vehicle_logger.main/gps_tracking"], "XYZ13");
    }

    #[test]
    fn empty_inputs() {
        let oracle = personal_oracle();
        let filler = SlotFiller::new(&oracle, BackendConfig::default());
        assert!(matches!(filler.fill_slots(&[], PERSONAL, AblationMode::Full), Err(DispatchError::NoScreens)));
        let hidden = bundled::vehicle_logger().with_visible(Vec::new()).unwrap();
        let r = filler.fill_slots(&[hidden], PERSONAL, AblationMode::Full).unwrap();
        assert!(r.fills.is_empty() && r.rejections.is_empty());
        let r = filler.fill_slots(&[bundled::vehicle_logger()], "  ", AblationMode::Full).unwrap();
        assert_eq!(r.rejections.len(), 10);
    }

    struct Fixed(Result<ExtractionResult, BackendError>);

    impl SpanExtractor for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn extract(&self, _q: &str, _c: &str, _cfg: &BackendConfig) -> Result<ExtractionResult, BackendError> {
            self.0.clone()
        }
    }

    #[test]
    fn bad_answers_become_rejections_and_outages_propagate() {
        let lying = Fixed(Ok(ExtractionResult {
            answer: Some(crate::backend::Answer {
                text: "Denver".into(),
                start_char: 0,
                end_char: 6,
            }),
            span_score: 1.0,
            no_answer_score: 0.0,
        }));
        let filler = SlotFiller::new(&lying, BackendConfig::default());
        let r = filler.fill_slots(&[bundled::united()], "from Boston", AblationMode::Full).unwrap();
        assert!(r.fills.is_empty());
        assert!(r.rejections.values().all(|&s| s == 1.0));

        let down = Fixed(Err(BackendError::Unavailable("refused".into())));
        let filler = SlotFiller::new(&down, BackendConfig::default());
        let err = filler.fill_slots(&[bundled::united()], "from Boston", AblationMode::Full).unwrap_err();
        assert!(matches!(err, DispatchError::Backend { ref slot_id, .. } if slot_id == "departure_airport"));
    }

    #[test]
    fn overlapping_fills_are_flagged_and_expanded() {
        // Answers every question with "an Jo", which expands to "San Jose".
        let greedy = Fixed(ExtractionResult::span("from San Jose", 6, 11, 0.9, 0.1).map_err(BackendError::InvalidConfig));
        let filler = SlotFiller::new(&greedy, BackendConfig::default());
        let r = filler.fill_slots(&[bundled::united()], "from San Jose", AblationMode::Full).unwrap();
        assert_eq!(r.fills.len(), 6);
        assert!(r.fills.values().all(|f| f.surface == "San Jose" && (f.token_start, f.token_end) == (1, 3)));
        assert_eq!(r.conflicts.len(), 15);

        let strict = SlotFiller::new(&greedy, BackendConfig::default().with_threshold(0.1));
        let r = strict.fill_slots(&[bundled::united()], "from San Jose", AblationMode::Full).unwrap();
        assert!(r.fills.is_empty());
        assert_eq!(r.rejections["search"], 0.1);
    }
}
