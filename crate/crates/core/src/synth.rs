//! Template-generated utterances with exact gold spans.
//!
//! A lexicon is tab-separated, one carrier phrase per row: slot id, carrier
//! with a `{v}` placeholder, and `|`-separated values, e.g.
//! `trip_type`, `log this trip as {v}`, `Business|Personal|Other`.
//!
//! A slot may have several rows. Each generated utterance picks one to three
//! distinct slots, one carrier and one value each, and joins the clauses with
//! `and` after an optional opener. Text is single-spaced, so it survives a
//! round trip through CoNLL unchanged.

use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::AnnotatedUtterance;
use crate::text::char_len;

const OPENERS: &[&str] = &["", "", "ok", "so", "hi"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("lexicon line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("the lexicon has no rows")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Carrier {
    before: String,
    after: String,
    values: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlotLexicon {
    /// Slots in first-appearance order with their carriers.
    slots: Vec<(String, Vec<Carrier>)>,
}

fn single_spaced(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl SlotLexicon {
    pub fn parse_tsv(text: &str) -> Result<Self, SynthError> {
        let mut lex = SlotLexicon::default();
        for (i, line) in text.lines().enumerate() {
            let err = |message: &str| SynthError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [slot, carrier, values] = cols[..] else {
                return Err(err("expected `slot<TAB>carrier<TAB>value|value`"));
            };
            let slot = slot.trim();
            if slot.is_empty() || slot.contains(char::is_whitespace) {
                return Err(err("slot ids must be non-empty and contain no spaces"));
            }
            let carrier = single_spaced(carrier);
            let Some((before, after)) = carrier.split_once("{v}") else {
                return Err(err("carrier has no {v}"));
            };
            if after.contains("{v}") {
                return Err(err("carrier has more than one {v}"));
            }
            // The value must be whole tokens.
            if !(before.is_empty() || before.ends_with(' ')) || !(after.is_empty() || after.starts_with(' ')) {
                return Err(err("{v} must be separated from the carrier words by spaces"));
            }
            let values: Vec<String> = values.split('|').map(single_spaced).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(err("no values"));
            }
            let c = Carrier {
                before: before.to_string(),
                after: after.to_string(),
                values,
            };
            match lex.slots.iter_mut().find(|(s, _)| s == slot) {
                Some((_, carriers)) => carriers.push(c),
                None => lex.slots.push((slot.to_string(), vec![c])),
            }
        }
        if lex.slots.is_empty() {
            return Err(SynthError::Empty);
        }
        Ok(lex)
    }

    pub fn slot_ids(&self) -> impl Iterator<Item = &str> {
        self.slots.iter().map(|(s, _)| s.as_str())
    }

    /// `n` utterances with ids `{prefix}-000`, `{prefix}-001`, ...
    pub fn generate(&self, n: usize, seed: u64, prefix: &str) -> Vec<AnnotatedUtterance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let width = n.saturating_sub(1).to_string().len().max(3);
        (0..n)
            .map(|i| self.one(&mut rng, format!("{prefix}-{i:0width$}")))
            .collect()
    }

    fn one(&self, rng: &mut ChaCha8Rng, id: String) -> AnnotatedUtterance {
        let k = rng.random_range(1..=3usize).min(self.slots.len());
        let mut picks = index::sample(rng, self.slots.len(), k).into_vec();
        picks.sort_unstable();
        // Shuffle clause order without disturbing determinism.
        if picks.len() > 1 && rng.random_bool(0.5) {
            picks.reverse();
        }
        let opener = *OPENERS.choose(rng).expect("openers");

        let mut text = opener.to_string();
        let mut spans = Vec::new();
        for (n, &p) in picks.iter().enumerate() {
            let (slot, carriers) = &self.slots[p];
            let c = carriers.choose(rng).expect("non-empty");
            let v = c.values.choose(rng).expect("non-empty");
            if !text.is_empty() {
                text.push(' ');
            }
            if n > 0 {
                text.push_str("and ");
            }
            text.push_str(&c.before);
            let start = char_len(&text);
            text.push_str(v);
            spans.push((slot.clone(), start, start + char_len(v)));
            text.push_str(&c.after);
        }
        AnnotatedUtterance::from_text(id, text, spans).expect("generated spans are token aligned")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEX: &str = "# demo\ntrip_type\tlog this trip as {v}\tBusiness|Personal|Other\ntrip_type\tthis was a {v} trip\tbusiness|personal\nodometer_value\tthe odometer reads {v}\t45210|12 500\nvehicle\tuse my {v}\tHonda Civic\n";

    #[test]
    fn generates_valid_seeded_utterances() {
        let lex = SlotLexicon::parse_tsv(LEX).unwrap();
        assert_eq!(lex.slot_ids().collect::<Vec<_>>(), ["trip_type", "odometer_value", "vehicle"]);
        let a = lex.generate(50, 4, "t");
        assert_eq!(a, lex.generate(50, 4, "t"));
        assert_ne!(a, lex.generate(50, 5, "t"));
        assert_eq!(a[7].utterance_id, "t-007");
        for u in &a {
            u.validate().unwrap();
            assert!((1..=3).contains(&u.slots.len()));
            let distinct: std::collections::BTreeSet<_> = u.slot_ids().into_iter().collect();
            assert_eq!(distinct.len(), u.slots.len());
            assert!(!u.text.contains("  "));
        }
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = |s: &str| SlotLexicon::parse_tsv(s).unwrap_err();
        assert!(matches!(bad("a\tno placeholder\tx"), SynthError::Parse { line: 1, .. }));
        assert!(matches!(bad("a\t{v} {v}\tx"), SynthError::Parse { .. }));
        assert!(matches!(bad("a\tas{v}\tx"), SynthError::Parse { .. }));
        assert!(matches!(bad("a\tas {v}\t|"), SynthError::Parse { .. }));
        assert!(matches!(bad("a b\tas {v}\tx"), SynthError::Parse { .. }));
        assert!(matches!(bad("a\tb"), SynthError::Parse { .. }));
        assert_eq!(bad("# only\n"), SynthError::Empty);
    }
}
