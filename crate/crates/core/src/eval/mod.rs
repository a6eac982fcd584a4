//! Scoring, experiment grids and fine-tuning plans.
//!
//! [`token_f1`] compares slot fills with gold annotations token by token:
//! for every slot type, the predicted and gold token multisets of each
//! utterance are intersected and the overlaps summed over the corpus. The
//! headline number is the support-weighted mean of the per-slot F1 scores,
//! support being the gold token count; a micro average is reported too, as is
//! the share of questions whose reject-or-fill decision was right.

mod plan;
pub mod reference;
mod sweep;

pub use plan::{build_curriculum, PlanError, StageKind, StageSpec, TrainingPlan, TrainingStage};
pub use sweep::{
    align_columns, distractor_sweep, oracle_factory, run_sweep, BackendFactory, CellContext, DistractorConfig, DistractorCounting,
    DistractorRow, DistractorTable, DomainCorpus, ExperimentConfig, RunRecord, SweepError, SweepRow, SweepTable,
    Trainer,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::AnnotatedUtterance;
use crate::dispatch::SlotFillResult;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold token count.
    pub support: usize,
    pub predicted: usize,
    pub overlap: usize,
}

impl SlotMetrics {
    pub fn from_counts(overlap: usize, predicted: usize, support: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(overlap, predicted);
        let recall = ratio(overlap, support);
        SlotMetrics {
            precision,
            recall,
            f1: harmonic(precision, recall),
            support,
            predicted,
            overlap,
        }
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_slot: BTreeMap<String, SlotMetrics>,
    /// Support-weighted mean of per-slot F1; 0 when there is no gold token.
    pub weighted_f1: f64,
    pub micro_f1: f64,
    /// Share of asked questions whose fill/reject decision matched the gold
    /// (filled iff the slot is annotated). `None` when nothing was asked.
    pub rejection_accuracy: Option<f64>,
    pub n_utterances: usize,
    pub n_questions: usize,
    pub n_rejections: usize,
}

impl MetricsReport {
    /// Per-slot breakdown as tab-separated text with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("slot\tprecision\trecall\tf1\tsupport\n");
        for (slot, m) in &self.per_slot {
            out.push_str(&format!(
                "{slot}\t{:.4}\t{:.4}\t{:.4}\t{}\n",
                m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str(&format!("weighted\t\t\t{:.4}\t{}\n", self.weighted_f1, self.total_support()));
        out
    }

    pub fn total_support(&self) -> usize {
        self.per_slot.values().map(|m| m.support).sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Compare tokens verbatim instead of lowercased with outer punctuation
    /// stripped.
    pub raw: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("gold has {gold} utterances but {predicted} predictions were given")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("position {index}: gold utterance `{gold}` is paired with prediction `{predicted}`")]
    Alignment {
        index: usize,
        gold: String,
        predicted: String,
    },
}

/// Whitespace tokens of `text` as compared by the metric.
pub fn metric_tokens(text: &str, opts: EvalOptions) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|t| {
            if opts.raw {
                return Some(t.to_string());
            }
            let t = t.trim_matches(|c: char| !c.is_alphanumeric());
            (!t.is_empty()).then(|| t.to_lowercase())
        })
        .collect()
}

/// Gold and predicted tokens of one slot in one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotTokens {
    pub slot_id: String,
    pub gold: Vec<String>,
    pub predicted: Vec<String>,
}

fn multiset_overlap(a: &[String], b: &[String]) -> usize {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in a {
        *counts.entry(t).or_default() += 1;
    }
    let mut overlap = 0;
    for t in b {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    overlap
}

/// Per-slot metrics plus (weighted, micro) F1 from per-utterance token lists.
pub fn score_slot_tokens(items: &[SlotTokens]) -> (BTreeMap<String, SlotMetrics>, f64, f64) {
    let mut totals: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    for it in items {
        let e = totals.entry(it.slot_id.as_str()).or_default();
        e.0 += multiset_overlap(&it.gold, &it.predicted);
        e.1 += it.predicted.len();
        e.2 += it.gold.len();
    }
    let per_slot: BTreeMap<String, SlotMetrics> = totals
        .into_iter()
        .map(|(slot, (o, p, g))| (slot.to_string(), SlotMetrics::from_counts(o, p, g)))
        .collect();

    let support: usize = per_slot.values().map(|m| m.support).sum();
    let weighted = if support == 0 {
        0.0
    } else {
        per_slot
            .values()
            .filter(|m| m.support > 0)
            .map(|m| m.support as f64 * m.f1)
            .sum::<f64>()
            / support as f64
    };
    let (o, p): (usize, usize) = per_slot.values().fold((0, 0), |(o, p), m| (o + m.overlap, p + m.predicted));
    let micro = SlotMetrics::from_counts(o, p, support).f1;
    (per_slot, weighted, micro)
}

/// Scores predictions against gold utterances paired by position and id.
pub fn token_f1(gold: &[AnnotatedUtterance], predicted: &[SlotFillResult]) -> Result<MetricsReport, EvalError> {
    token_f1_with(gold, predicted, EvalOptions::default())
}

pub fn token_f1_with(
    gold: &[AnnotatedUtterance],
    predicted: &[SlotFillResult],
    opts: EvalOptions,
) -> Result<MetricsReport, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    let mut items = Vec::new();
    let (mut n_questions, mut n_rejections, mut correct) = (0, 0, 0);
    for (index, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.utterance_id != p.utterance_id {
            return Err(EvalError::Alignment {
                index,
                gold: g.utterance_id.clone(),
                predicted: p.utterance_id.clone(),
            });
        }
        let mut gold_tokens: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for fill in &g.slots {
            gold_tokens
                .entry(fill.slot_id.as_str())
                .or_default()
                .extend(metric_tokens(&fill.surface, opts));
        }
        let slots: BTreeSet<&str> = gold_tokens.keys().copied().chain(p.fills.keys().map(String::as_str)).collect();
        for slot in slots {
            items.push(SlotTokens {
                slot_id: slot.to_string(),
                gold: gold_tokens.get(slot).cloned().unwrap_or_default(),
                predicted: p.fills.get(slot).map(|f| metric_tokens(&f.surface, opts)).unwrap_or_default(),
            });
        }

        let annotated: BTreeSet<&str> = g.slots.iter().map(|s| s.slot_id.as_str()).collect();
        n_questions += p.questions.len();
        n_rejections += p.rejections.len();
        correct += p
            .questions
            .keys()
            .filter(|slot| p.fills.contains_key(*slot) == annotated.contains(slot.as_str()))
            .count();
    }
    let (per_slot, weighted_f1, micro_f1) = score_slot_tokens(&items);
    Ok(MetricsReport {
        per_slot,
        weighted_f1,
        micro_f1,
        rejection_accuracy: (n_questions > 0).then(|| correct as f64 / n_questions as f64),
        n_utterances: gold.len(),
        n_questions,
        n_rejections,
    })
}
