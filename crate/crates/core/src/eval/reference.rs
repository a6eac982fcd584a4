//! Published scores for side-by-side display. Nothing here is asserted
//! against local runs; a small local setup cannot reproduce them.
//!
//! Domains are named as in the bundled data: `vehicle_logger`, `atis_visual`,
//! `united`, `trip_advisor`.

use crate::question::AblationMode;

pub const TRAIN_SIZES: [usize; 5] = [0, 5, 50, 100, 500];

/// (domain, joint BERT baseline, visual slot QA) weighted token F1 at
/// [`TRAIN_SIZES`].
pub const OVERALL: [(&str, [f64; 5], [f64; 5]); 4] = [
    ("vehicle_logger", [0.00, 0.00, 0.48, 0.45, 0.78], [0.48, 0.46, 0.73, 0.80, 0.87]),
    ("atis_visual", [0.00, 0.00, 0.66, 0.77, 0.91], [0.60, 0.74, 0.88, 0.93, 0.97]),
    ("united", [0.00, 0.00, 0.37, 0.44, 0.51], [0.40, 0.44, 0.58, 0.72, 0.74]),
    ("trip_advisor", [0.00, 0.00, 0.18, 0.53, 0.59], [0.52, 0.47, 0.63, 0.66, 0.66]),
];

pub const ABLATION_SIZES: [usize; 4] = [0, 50, 100, 500];

/// Vehicle Logger F1 per question mode at [`ABLATION_SIZES`].
pub const ABLATION: [(AblationMode, [f64; 4]); 3] = [
    (AblationMode::NoVisuals, [0.01, 0.29, 0.32, 0.71]),
    (AblationMode::TextOnly, [0.36, 0.69, 0.71, 0.88]),
    (AblationMode::Full, [0.48, 0.73, 0.80, 0.87]),
];

pub const CROSS_DOMAIN_SIZES: [usize; 4] = [0, 5, 100, 500];

/// Vehicle Logger alone, then with an extra atis_visual stage before it.
pub const CROSS_DOMAIN: [(&str, [f64; 4]); 2] = [
    ("vehicle_logger", [0.48, 0.46, 0.80, 0.87]),
    ("atis_visual+vehicle_logger", [0.52, 0.60, 0.80, 0.89]),
];

/// Zero-shot F1 with 1..=5 simultaneously visible elements.
pub const DISTRACTORS: [(&str, [f64; 5]); 2] = [
    ("vehicle_logger", [0.52, 0.51, 0.49, 0.49, 0.46]),
    ("atis_visual", [0.60, 0.58, 0.56, 0.53, 0.52]),
];

fn at<const N: usize>(sizes: &[usize; N], row: &[f64; N], k: usize) -> Option<f64> {
    sizes.iter().position(|&s| s == k).map(|i| row[i])
}

/// Published visual slot QA score for a cell, if there is one.
pub fn visual_slot_f1(domain: &str, k: usize, mode: AblationMode) -> Option<f64> {
    match mode {
        AblationMode::Full => OVERALL
            .iter()
            .find(|(d, _, _)| *d == domain)
            .and_then(|(_, _, row)| at(&TRAIN_SIZES, row, k)),
        _ if domain == "vehicle_logger" => ABLATION
            .iter()
            .find(|(m, _)| *m == mode)
            .and_then(|(_, row)| at(&ABLATION_SIZES, row, k)),
        _ => None,
    }
}

pub fn baseline_f1(domain: &str, k: usize) -> Option<f64> {
    OVERALL
        .iter()
        .find(|(d, _, _)| *d == domain)
        .and_then(|(_, row, _)| at(&TRAIN_SIZES, row, k))
}

/// Published zero-shot scores for `v` visible elements.
pub fn distractor_f1(domain: &str, v: usize) -> Option<f64> {
    let (_, row) = DISTRACTORS.iter().find(|(d, _)| *d == domain)?;
    v.checked_sub(1).and_then(|i| row.get(i)).copied()
}
