use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use crate::screen::{GuiCategory, GuiElement, Screen, ScreenError};

const ATIS_SCHEMA: &str = include_str!("../../data/schemas/atis.tsv");

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("schema line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema tag `{0}` is listed twice")]
    DuplicateTag(String),
    #[error("schema description `{description}` is shared by `{first}` and `{second}`")]
    DuplicateDescription {
        description: String,
        first: String,
        second: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ordered slot tag → description mapping. Order defines slot ordinals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SlotSchema {
    entries: Vec<(String, String)>,
    index: HashMap<String, usize>,
}

impl SlotSchema {
    pub fn from_pairs<I, T, D>(pairs: I) -> Result<Self, SchemaError>
    where
        I: IntoIterator<Item = (T, D)>,
        T: Into<String>,
        D: Into<String>,
    {
        let mut schema = SlotSchema::default();
        let mut descriptions: HashMap<String, String> = HashMap::new();
        for (tag, desc) in pairs {
            let (tag, desc) = (tag.into(), desc.into());
            if schema.index.contains_key(&tag) {
                return Err(SchemaError::DuplicateTag(tag));
            }
            if let Some(first) = descriptions.insert(desc.clone(), tag.clone()) {
                return Err(SchemaError::DuplicateDescription {
                    description: desc,
                    first,
                    second: tag,
                });
            }
            schema.index.insert(tag.clone(), schema.entries.len());
            schema.entries.push((tag, desc));
        }
        Ok(schema)
    }

    /// Parses `tag<TAB>description` rows; `#` lines are comments.
    pub fn parse_tsv(text: &str) -> Result<Self, SchemaError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((tag, desc)) = line.split_once('\t') else {
                return Err(SchemaError::Parse {
                    line: i + 1,
                    message: "expected `tag<TAB>description`".into(),
                });
            };
            let (tag, desc) = (tag.trim(), desc.trim());
            if tag.is_empty() || desc.is_empty() || desc.contains('\t') {
                return Err(SchemaError::Parse {
                    line: i + 1,
                    message: "tag and description must be non-empty and the row must have two columns".into(),
                });
            }
            pairs.push((tag.to_string(), desc.to_string()));
        }
        SlotSchema::from_pairs(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SchemaError> {
        SlotSchema::parse_tsv(&std::fs::read_to_string(path)?)
    }

    /// The shipped 83-slot ATIS schema.
    pub fn atis() -> Self {
        SlotSchema::parse_tsv(ATIS_SCHEMA).expect("bundled ATIS schema is valid")
    }

    /// Schema built from the slots of a screen, described by their element
    /// labels (or the humanized slot id when the label is empty).
    pub fn from_screen(screen: &Screen) -> Result<Self, SchemaError> {
        SlotSchema::from_pairs(screen.elements().iter().map(|e| {
            let desc = if e.label.trim().is_empty() {
                humanize_tag(&e.slot_id)
            } else {
                e.label.trim().to_string()
            };
            (e.slot_id.clone(), desc)
        }))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn description(&self, tag: &str) -> Option<&str> {
        self.index.get(tag).map(|&i| self.entries[i].1.as_str())
    }

    pub fn ordinal(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.index.contains_key(tag)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(t, d)| (t.as_str(), d.as_str()))
    }

    /// A copy extended with `extra` tags (humanized) that are not yet present,
    /// appended in the given order.
    pub fn extended<'a>(&self, extra: impl IntoIterator<Item = &'a str>) -> SlotSchema {
        let mut out = self.clone();
        let mut seen: HashSet<String> = out.entries.iter().map(|(_, d)| d.clone()).collect();
        for tag in extra {
            if out.contains(tag) {
                continue;
            }
            let mut desc = humanize_tag(tag);
            while !seen.insert(desc.clone()) {
                desc = format!("{desc} ({tag})");
            }
            out.index.insert(tag.to_string(), out.entries.len());
            out.entries.push((tag.to_string(), desc));
        }
        out
    }

    /// Every slot as a visible text field, in schema order.
    pub fn to_screen(&self, screen_id: &str, app_name: &str) -> Result<Screen, ScreenError> {
        let elements = self
            .entries
            .iter()
            .map(|(tag, desc)| GuiElement::new(tag.clone(), GuiCategory::TextField, desc.clone(), tag.clone()))
            .collect();
        Screen::all_visible(screen_id, app_name, elements)
    }
}

pub fn strip_bio_prefix(tag: &str) -> &str {
    tag.strip_prefix("B-").or_else(|| tag.strip_prefix("I-")).unwrap_or(tag)
}

/// Replaces `_` and `.` with spaces.
pub fn humanize_tag(tag: &str) -> String {
    tag.replace(['_', '.'], " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Description for a slot tag: the schema entry when present, else the
/// humanized tag. A leading `B-`/`I-` is ignored.
pub fn tag_to_description(tag: &str, schema: &SlotSchema) -> String {
    let tag = strip_bio_prefix(tag);
    schema
        .description(tag)
        .map(str::to_string)
        .unwrap_or_else(|| humanize_tag(tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptions() {
        let atis = SlotSchema::atis();
        assert_eq!(tag_to_description("aircraft_code", &atis), "aircraft code");
        assert_eq!(tag_to_description("B-aircraft_code", &atis), "aircraft code");
        assert_eq!(tag_to_description("arrive_date.day_name", &atis), "arrival date (day name)");
        assert_eq!(tag_to_description("foo_bar.baz", &atis), "foo bar baz");
        assert_eq!(tag_to_description("foo_bar.baz", &SlotSchema::default()), "foo bar baz");
    }

    #[test]
    fn bundled_atis_has_83_distinct_slots() {
        let atis = SlotSchema::atis();
        assert_eq!(atis.len(), 83);
        let descs: HashSet<_> = atis.iter().map(|(_, d)| d).collect();
        assert_eq!(descs.len(), 83);
        assert_eq!(atis.ordinal("aircraft_code"), Some(0));
    }

    #[test]
    fn rejects_duplicates_and_bad_rows() {
        assert!(matches!(
            SlotSchema::parse_tsv("a\tx\na\ty\n"),
            Err(SchemaError::DuplicateTag(t)) if t == "a"
        ));
        assert!(matches!(
            SlotSchema::parse_tsv("a\tx\nb\tx\n"),
            Err(SchemaError::DuplicateDescription { .. })
        ));
        assert!(matches!(SlotSchema::parse_tsv("# c\na x\n"), Err(SchemaError::Parse { line: 2, .. })));
        assert!(matches!(SlotSchema::parse_tsv("a\t \n"), Err(SchemaError::Parse { line: 1, .. })));
    }

    #[test]
    fn extension_keeps_descriptions_distinct() {
        let base = SlotSchema::from_pairs([("a", "x y")]).unwrap();
        let ext = base.extended(["x_y", "a", "z"]);
        assert_eq!(ext.len(), 3);
        assert_eq!(ext.description("x_y"), Some("x y (x_y)"));
        assert_eq!(ext.ordinal("z"), Some(2));
    }

    #[test]
    fn schema_screen() {
        let schema = SlotSchema::from_pairs([("aircraft_code", "aircraft code"), ("meal", "meal")]).unwrap();
        let screen = schema.to_screen("atis", "ATIS").unwrap();
        assert_eq!(screen.elements().len(), 2);
        assert_eq!(screen.visible().len(), 2);
        assert_eq!(SlotSchema::from_screen(&screen).unwrap(), schema);
    }
}
