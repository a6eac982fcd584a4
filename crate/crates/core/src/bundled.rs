//! Screens, lexicons, corpora and tables shipped in `data/`, compiled into
//! the library.
//!
//! Four domains have screens and generated corpora: `vehicle_logger`,
//! `united`, `trip_advisor` and `atis_visual` (the ATIS tag set shown as one
//! text field per slot). Two more screens exist only as distractors.

use std::path::PathBuf;
use std::sync::OnceLock;

use crate::backend::Gazetteer;
use crate::dataset::{parse_bio_str, AnnotatedUtterance, BioOptions, SlotSchema};
use crate::eval::DomainCorpus;
use crate::question::OverrideTable;
use crate::screen::{parse_screen, Screen};
use crate::synth::SlotLexicon;

pub const DOMAINS: [&str; 4] = ["vehicle_logger", "united", "trip_advisor", "atis_visual"];

/// Seed and size of the committed generated corpora.
pub const SYNTH_SEED: u64 = 2020;
pub const SYNTH_SIZE: usize = 120;

const SCREENS: [(&str, &str); 5] = [
    ("vehicle_logger", include_str!("../data/screens/vehicle_logger.screen")),
    ("united", include_str!("../data/screens/united.screen")),
    ("trip_advisor", include_str!("../data/screens/trip_advisor.screen")),
    ("weather", include_str!("../data/screens/weather.screen")),
    ("food_delivery", include_str!("../data/screens/food_delivery.screen")),
];

const LEXICONS: [(&str, &str); 4] = [
    ("vehicle_logger", include_str!("../data/synth/vehicle_logger.tsv")),
    ("united", include_str!("../data/synth/united.tsv")),
    ("trip_advisor", include_str!("../data/synth/trip_advisor.tsv")),
    ("atis_visual", include_str!("../data/synth/atis_visual.tsv")),
];

const CORPORA: [(&str, &str); 4] = [
    ("vehicle_logger", include_str!("../data/corpora/vehicle_logger.conll")),
    ("united", include_str!("../data/corpora/united.conll")),
    ("trip_advisor", include_str!("../data/corpora/trip_advisor.conll")),
    ("atis_visual", include_str!("../data/corpora/atis_visual.conll")),
];

pub const ATIS_SAMPLE: &str = include_str!("../data/corpora/atis_sample.conll");
pub const OVERRIDES: &str = include_str!("../data/overrides/sample.tsv");
pub const GAZETTEER: &str = include_str!("../data/gazetteer.tsv");

/// The on-disk `data/` directory of this crate's source tree.
pub fn data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data"))
}

fn lookup<'a>(table: &[(&str, &'a str)], name: &str) -> Option<&'a str> {
    table.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// A bundled screen by short name, including `atis_visual`.
pub fn screen(name: &str) -> Option<Screen> {
    if name == "atis_visual" {
        return Some(atis_screen());
    }
    let text = lookup(&SCREENS, name)?;
    Some(parse_screen(text).expect("bundled screens are valid").0)
}

pub fn vehicle_logger() -> Screen {
    screen("vehicle_logger").expect("bundled")
}

pub fn united() -> Screen {
    screen("united").expect("bundled")
}

pub fn trip_advisor() -> Screen {
    screen("trip_advisor").expect("bundled")
}

/// Every ATIS tag as a text field labelled with its description.
pub fn atis_screen() -> Screen {
    static SCREEN: OnceLock<Screen> = OnceLock::new();
    SCREEN
        .get_or_init(|| SlotSchema::atis().to_screen("atis_visual.flight", "ATIS").expect("valid"))
        .clone()
}

/// All bundled screens: the four domains, then the distractor-only ones.
pub fn screens() -> Vec<Screen> {
    let mut out: Vec<Screen> = DOMAINS.iter().filter_map(|d| screen(d)).collect();
    out.extend(
        SCREENS
            .iter()
            .filter(|(n, _)| !DOMAINS.contains(n))
            .filter_map(|(n, _)| screen(n)),
    );
    out
}

pub fn lexicon(domain: &str) -> Option<SlotLexicon> {
    Some(SlotLexicon::parse_tsv(lookup(&LEXICONS, domain)?).expect("bundled lexicons are valid"))
}

/// Id prefix of a domain's generated utterances.
pub fn id_prefix(domain: &str) -> String {
    domain.split('_').filter_map(|w| w.chars().next()).collect()
}

/// The committed generated corpus of a domain.
pub fn corpus(domain: &str) -> Option<Vec<AnnotatedUtterance>> {
    let text = lookup(&CORPORA, domain)?;
    Some(parse_bio_str(text, BioOptions { strict: true }).expect("bundled corpora are valid"))
}

/// Regenerates a domain's corpus from its lexicon.
pub fn generate_corpus(domain: &str) -> Option<Vec<AnnotatedUtterance>> {
    Some(lexicon(domain)?.generate(SYNTH_SIZE, SYNTH_SEED, &id_prefix(domain)))
}

pub fn domain_corpus(domain: &str) -> Option<DomainCorpus> {
    Some(DomainCorpus::new(domain, screen(domain)?, corpus(domain)?))
}

pub fn domain_corpora() -> Vec<DomainCorpus> {
    DOMAINS.iter().filter_map(|d| domain_corpus(d)).collect()
}

/// Fifty hand-checked ATIS-style utterances.
pub fn atis_sample() -> Vec<AnnotatedUtterance> {
    parse_bio_str(ATIS_SAMPLE, BioOptions { strict: true }).expect("bundled sample is valid")
}

pub fn overrides() -> OverrideTable {
    OverrideTable::parse(OVERRIDES).expect("bundled overrides are valid")
}

pub fn gazetteer() -> Gazetteer {
    Gazetteer::parse_tsv(GAZETTEER).expect("bundled gazetteer is valid")
}
