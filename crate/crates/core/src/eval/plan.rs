//! Ordered fine-tuning stages run one after another on a single model.
//!
//! Stage 1 of any multi-stage plan trains on a general question answering
//! corpus; later stages add slot-filling data, auxiliary domains first and the
//! target domain last. A zero-shot plan keeps the target as an
//! evaluate-only stage and serves the model from the stage before it.
//!
//! The manifest is JSON:
//!
//! ```text
//! {"stages":[{"index":1,"dataset":"squad2.json","kind":"general_qa","epochs":2,
//!             "learning_rate":"3e-5","freeze":"none","evaluate_only":false}, ...],
//!  "serve_stage":1}
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    GeneralQa,
    SlotFilling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub dataset_ref: String,
    pub kind: StageKind,
    pub epochs: u32,
    pub learning_rate: String,
    pub freeze: String,
}

impl StageSpec {
    pub fn new(dataset_ref: impl Into<String>, kind: StageKind) -> Self {
        StageSpec {
            dataset_ref: dataset_ref.into(),
            kind,
            epochs: 2,
            learning_rate: "3e-5".into(),
            freeze: "none".into(),
        }
    }

    pub fn general_qa(dataset_ref: impl Into<String>) -> Self {
        Self::new(dataset_ref, StageKind::GeneralQa)
    }

    pub fn slot_filling(dataset_ref: impl Into<String>) -> Self {
        Self::new(dataset_ref, StageKind::SlotFilling)
    }

    pub fn with_epochs(mut self, epochs: u32) -> Self {
        self.epochs = epochs;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingStage {
    pub index: usize,
    #[serde(rename = "dataset")]
    pub dataset_ref: String,
    pub kind: StageKind,
    pub epochs: u32,
    pub learning_rate: String,
    pub freeze: String,
    pub evaluate_only: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPlan {
    stages: Vec<TrainingStage>,
    serve_stage: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("a training plan needs at least one stage")]
    EmptyPlan,
    #[error("stage 1 of a multi-stage plan must be general question answering, not `{0}`")]
    FirstStageNotGeneralQa(String),
    #[error("stage {index}: {reason}")]
    InvalidStage { index: usize, reason: String },
    #[error("stage indices must run 1..={n} in order")]
    NonContiguous { n: usize },
    #[error("serve stage {serve} does not match the plan")]
    ServeStage { serve: usize },
    #[error("a zero-shot plan needs a stage to serve before the target")]
    NothingToServe,
    #[error("malformed manifest: {0}")]
    Manifest(String),
}

/// Validates `specs` and numbers them from 1.
pub fn build_curriculum(specs: Vec<StageSpec>) -> Result<TrainingPlan, PlanError> {
    let stages = specs
        .into_iter()
        .enumerate()
        .map(|(i, s)| TrainingStage {
            index: i + 1,
            dataset_ref: s.dataset_ref,
            kind: s.kind,
            epochs: s.epochs,
            learning_rate: s.learning_rate,
            freeze: s.freeze,
            evaluate_only: false,
        })
        .collect::<Vec<_>>();
    let plan = TrainingPlan {
        serve_stage: stages.len(),
        stages,
    };
    plan.validate()?;
    Ok(plan)
}

impl TrainingPlan {
    pub fn stages(&self) -> &[TrainingStage] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// The stage whose checkpoint answers questions.
    pub fn serving_stage(&self) -> &TrainingStage {
        &self.stages[self.serve_stage - 1]
    }

    /// Stages that actually train.
    pub fn trained_stages(&self) -> impl Iterator<Item = &TrainingStage> {
        self.stages.iter().filter(|s| !s.evaluate_only)
    }

    /// Marks the final stage evaluate-only and serves stage N-1.
    pub fn zero_shot(mut self) -> Result<Self, PlanError> {
        if self.stages.len() < 2 {
            return Err(PlanError::NothingToServe);
        }
        let n = self.stages.len();
        self.stages[n - 1].evaluate_only = true;
        self.serve_stage = n - 1;
        Ok(self)
    }

    pub fn is_zero_shot(&self) -> bool {
        self.stages.last().is_some_and(|s| s.evaluate_only)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let n = self.stages.len();
        if n == 0 {
            return Err(PlanError::EmptyPlan);
        }
        if self.stages.iter().enumerate().any(|(i, s)| s.index != i + 1) {
            return Err(PlanError::NonContiguous { n });
        }
        if n >= 2 && self.stages[0].kind != StageKind::GeneralQa {
            return Err(PlanError::FirstStageNotGeneralQa(self.stages[0].dataset_ref.clone()));
        }
        for s in &self.stages {
            let invalid = |reason: &str| PlanError::InvalidStage {
                index: s.index,
                reason: reason.to_string(),
            };
            if s.dataset_ref.trim().is_empty() {
                return Err(invalid("empty dataset reference"));
            }
            if s.epochs == 0 && !s.evaluate_only {
                return Err(invalid("zero epochs"));
            }
            if s.evaluate_only && s.index != n {
                return Err(invalid("only the final stage may be evaluate-only"));
            }
        }
        let expected = if self.is_zero_shot() { n - 1 } else { n };
        if self.serve_stage != expected {
            return Err(PlanError::ServeStage {
                serve: self.serve_stage,
            });
        }
        Ok(())
    }

    pub fn to_manifest(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plans serialize");
        s.push('\n');
        s
    }

    pub fn from_manifest(text: &str) -> Result<Self, PlanError> {
        let plan: TrainingPlan = serde_json::from_str(text).map_err(|e| PlanError::Manifest(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }
}
