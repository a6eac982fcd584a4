//! Button-concept and icon-class name tables.

use std::collections::BTreeSet;
use std::sync::OnceLock;

const BUTTON_CONCEPTS: &str = include_str!("../data/vocab/button_concepts.txt");
const ICON_CLASSES: &str = include_str!("../data/vocab/icon_classes.txt");

/// Open vocabularies used to flag unexpected annotations. Membership tests
/// are case-insensitive and treat `_`, `-` and spaces alike.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    button_concepts: BTreeSet<String>,
    icon_classes: BTreeSet<String>,
}

fn key(name: &str) -> String {
    name.trim()
        .chars()
        .map(|c| if c == '_' || c == '-' { ' ' } else { c.to_ascii_lowercase() })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(key)
        .collect()
}

impl Vocabulary {
    /// Builds vocabularies from newline-separated lists (`#` starts a comment line).
    pub fn from_lists(button_concepts: &str, icon_classes: &str) -> Self {
        Vocabulary {
            button_concepts: parse_list(button_concepts),
            icon_classes: parse_list(icon_classes),
        }
    }

    pub fn bundled() -> &'static Vocabulary {
        static BUNDLED: OnceLock<Vocabulary> = OnceLock::new();
        BUNDLED.get_or_init(|| Vocabulary::from_lists(BUTTON_CONCEPTS, ICON_CLASSES))
    }

    pub fn has_button_concept(&self, name: &str) -> bool {
        self.button_concepts.contains(&key(name))
    }

    pub fn has_icon_class(&self, name: &str) -> bool {
        self.icon_classes.contains(&key(name))
    }

    pub fn button_concepts(&self) -> impl Iterator<Item = &str> {
        self.button_concepts.iter().map(String::as_str)
    }

    pub fn icon_classes(&self) -> impl Iterator<Item = &str> {
        self.icon_classes.iter().map(String::as_str)
    }
}
