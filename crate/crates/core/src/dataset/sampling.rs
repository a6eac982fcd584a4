//! Seeded few-shot sampling and train/test splitting.
//!
//! All draws use ChaCha8 seeded from a `u64`, so a (corpus, k, seed) triple
//! always yields the same subset on every platform.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{AnnotatedUtterance, SlotSchema};

/// `min(k, n)` distinct indices below `n`, sorted ascending.
pub fn sample_indices(n: usize, k: usize, seed: u64) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, n, k).into_vec();
    picks.sort_unstable();
    picks
}

/// Uniform sample without replacement of `min(k, |utts|)` utterances, kept
/// in corpus order. `k = 0` is the zero-shot case and returns nothing.
pub fn sample_few_shot(utts: &[AnnotatedUtterance], k: usize, seed: u64) -> Vec<AnnotatedUtterance> {
    sample_indices(utts.len(), k, seed)
        .into_iter()
        .map(|i| utts[i].clone())
        .collect()
}

/// Like [`sample_few_shot`] but first picks one utterance per slot type (in
/// sorted slot order, from a seeded shuffle) until every type is covered or
/// `k` is reached, then fills up uniformly.
pub fn sample_stratified(utts: &[AnnotatedUtterance], k: usize, seed: u64) -> Vec<AnnotatedUtterance> {
    let k = k.min(utts.len());
    let mut order: Vec<usize> = (0..utts.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let slot_types: BTreeSet<&str> = utts.iter().flat_map(|u| u.slots.iter().map(|s| s.slot_id.as_str())).collect();
    let mut chosen = BTreeSet::new();
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    for slot in slot_types {
        if chosen.len() == k {
            break;
        }
        if covered.contains(slot) {
            continue;
        }
        if let Some(&i) = order
            .iter()
            .find(|&&i| !chosen.contains(&i) && utts[i].slots.iter().any(|s| s.slot_id == slot))
        {
            chosen.insert(i);
            covered.extend(utts[i].slots.iter().map(|s| s.slot_id.as_str()));
        }
    }
    for &i in &order {
        if chosen.len() == k {
            break;
        }
        chosen.insert(i);
    }
    chosen.into_iter().map(|i| utts[i].clone()).collect()
}

/// Seeded split into (train, test); the test part holds
/// `round(n * test_fraction)` utterances. Both keep corpus order.
pub fn train_test_split(
    utts: &[AnnotatedUtterance],
    test_fraction: f64,
    seed: u64,
) -> (Vec<AnnotatedUtterance>, Vec<AnnotatedUtterance>) {
    let n = utts.len();
    let n_test = ((n as f64) * test_fraction.clamp(0.0, 1.0)).round() as usize;
    let test_idx: BTreeSet<usize> = sample_indices(n, n_test, seed).into_iter().collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, u) in utts.iter().enumerate() {
        if test_idx.contains(&i) {
            test.push(u.clone());
        } else {
            train.push(u.clone());
        }
    }
    (train, test)
}

/// Which slot types a sample covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotCoverage {
    pub counts: BTreeMap<String, usize>,
    pub missing: Vec<String>,
}

impl SlotCoverage {
    pub fn covered(&self) -> usize {
        self.counts.len()
    }
}

/// Per-slot utterance counts over `sample`, plus the schema slots it never
/// mentions (in schema order).
pub fn slot_coverage(sample: &[AnnotatedUtterance], schema: &SlotSchema) -> SlotCoverage {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for u in sample {
        for slot in u.slot_ids() {
            *counts.entry(slot.to_string()).or_default() += 1;
        }
    }
    let missing = schema
        .tags()
        .filter(|t| !counts.contains_key(*t))
        .map(str::to_string)
        .collect();
    SlotCoverage { counts, missing }
}
