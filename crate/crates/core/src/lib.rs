//! Slot filling as extractive question answering.
//!
//! GUI elements on a screen (or bare slot tags from a tagged corpus) become
//! natural-language questions; each question is paired with the user's
//! utterance and a span extractor either returns the answer span (the slot
//! value) or rejects the question. Around that loop the crate provides corpus
//! conversion to SQuAD v2, seeded few-shot sampling, a weighted token F1
//! metric, experiment grids and multi-stage fine-tuning plans.
//!
//! Modules, roughly bottom-up:
//!
//! - [`screen`]: annotated screens and their file format
//! - [`question`]: rule templates, command stripping, ablation modes
//! - [`dataset`]: BIO corpora, slot schemas, SQuAD v2 export, sampling
//! - [`backend`]: the span-extraction contract and its implementations
//! - [`dispatch`]: end-to-end slot filling for a screen and an utterance
//! - [`eval`]: metrics, sweeps, distractor runs and training plans
//! - [`synth`]: template-generated corpora with known gold fills
//! - [`bundled`]: the screens, schema and corpora shipped with the crate

pub mod backend;
pub mod bundled;
pub mod dataset;
pub mod dispatch;
pub mod eval;
pub mod question;
pub mod screen;
pub mod synth;
pub mod text;
pub mod vocab;

pub use backend::{BackendConfig, BackendError, ExtractionResult, GoldOracle, LexicalBackend, RemoteBackend, SpanExtractor};
pub use dataset::{AnnotatedUtterance, NegativePolicy, QaExample, SlotFill, SlotSchema};
pub use dispatch::{align_to_tokens, SlotFillResult, SlotFiller};
pub use eval::{token_f1, MetricsReport, TrainingPlan};
pub use question::{AblationMode, Question, QuestionGenerator};
pub use screen::{load_screen, GuiCategory, GuiElement, Screen};
