//! Semantically annotated GUI screens.
//!
//! A screen file is the hand-off point from whatever produced the GUI
//! annotation (a vision classifier or a human annotator) to the rest of the
//! toolkit. It is JSON with the keys `screen_id`, `app_name`, `elements[]`
//! and `visible[]`; each element carries `id`, `category`, `label`, optional
//! `choices[]`, `button_concept`, `icon_class`, and the `slot_id` it fills.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::vocab::Vocabulary;

/// UI component category of an element.
///
/// Covers the RICO component taxonomy plus the finer button kinds the rule
/// engine distinguishes. Unknown names are kept verbatim in [`GuiCategory::Other`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GuiCategory {
    TextField,
    RadioButton,
    TextButton,
    Checkbox,
    OnOffSwitch,
    Icon,
    TabButton,
    SearchButton,
    Advertisement,
    BackgroundImage,
    BottomNavigation,
    ButtonBar,
    Card,
    DatePicker,
    Drawer,
    Image,
    ListItem,
    MapView,
    Modal,
    NumberStepper,
    PagerIndicator,
    Slider,
    Text,
    Toolbar,
    Video,
    WebView,
    Other(String),
}

const NAMED: &[(GuiCategory, &str, &[&str])] = &[
    (GuiCategory::TextField, "TextField", &["input", "edittext"]),
    (GuiCategory::RadioButton, "RadioButton", &[]),
    (GuiCategory::TextButton, "TextButton", &["button"]),
    (GuiCategory::Checkbox, "Checkbox", &[]),
    (GuiCategory::OnOffSwitch, "OnOffSwitch", &["switch", "toggle"]),
    (GuiCategory::Icon, "Icon", &[]),
    (GuiCategory::TabButton, "TabButton", &["multitab", "tab"]),
    (GuiCategory::SearchButton, "SearchButton", &[]),
    (GuiCategory::Advertisement, "Advertisement", &["ad", "ads"]),
    (GuiCategory::BackgroundImage, "BackgroundImage", &[]),
    (GuiCategory::BottomNavigation, "BottomNavigation", &[]),
    (GuiCategory::ButtonBar, "ButtonBar", &[]),
    (GuiCategory::Card, "Card", &[]),
    (GuiCategory::DatePicker, "DatePicker", &[]),
    (GuiCategory::Drawer, "Drawer", &[]),
    (GuiCategory::Image, "Image", &[]),
    (GuiCategory::ListItem, "ListItem", &[]),
    (GuiCategory::MapView, "MapView", &[]),
    (GuiCategory::Modal, "Modal", &[]),
    (GuiCategory::NumberStepper, "NumberStepper", &[]),
    (GuiCategory::PagerIndicator, "PagerIndicator", &[]),
    (GuiCategory::Slider, "Slider", &[]),
    (GuiCategory::Text, "Text", &[]),
    (GuiCategory::Toolbar, "Toolbar", &[]),
    (GuiCategory::Video, "Video", &[]),
    (GuiCategory::WebView, "WebView", &[]),
];

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl GuiCategory {
    /// Parses a category name. Matching ignores case, spaces and
    /// punctuation, so "On/Off Switch", "on_off_switch" and "OnOffSwitch"
    /// are the same category. Unknown names become `Other(name)`.
    pub fn from_name(name: &str) -> Self {
        let key = normalize_name(name);
        for (cat, canonical, aliases) in NAMED {
            if normalize_name(canonical) == key || aliases.iter().any(|a| *a == key) {
                return cat.clone();
            }
        }
        GuiCategory::Other(name.trim().to_string())
    }

    pub fn name(&self) -> &str {
        match self {
            GuiCategory::Other(name) => name,
            known => NAMED
                .iter()
                .find(|(cat, _, _)| cat == known)
                .map(|(_, name, _)| *name)
                .expect("every named category has a table entry"),
        }
    }

    /// All named (non-`Other`) categories.
    pub fn named() -> impl Iterator<Item = GuiCategory> {
        NAMED.iter().map(|(cat, _, _)| cat.clone())
    }
}

impl fmt::Display for GuiCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for GuiCategory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for GuiCategory {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        Ok(GuiCategory::from_name(&name))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuiElement {
    #[serde(rename = "id")]
    pub element_id: String,
    pub category: GuiCategory,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub button_concept: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icon_class: Option<String>,
    pub slot_id: String,
}

impl GuiElement {
    pub fn new(
        element_id: impl Into<String>,
        category: GuiCategory,
        label: impl Into<String>,
        slot_id: impl Into<String>,
    ) -> Self {
        GuiElement {
            element_id: element_id.into(),
            category,
            label: label.into(),
            choices: Vec::new(),
            button_concept: None,
            icon_class: None,
            slot_id: slot_id.into(),
        }
    }

    pub fn with_choices<I, S>(mut self, choices: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.choices = choices.into_iter().map(Into::into).collect();
        self
    }
}

/// A validated screen. Construct through [`Screen::new`], [`parse_screen`] or
/// [`load_screen`]; fields are read-only afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Screen {
    screen_id: String,
    app_name: String,
    elements: Vec<GuiElement>,
    visible: Vec<String>,
}

#[derive(Serialize)]
struct ScreenRepr<'a> {
    screen_id: &'a str,
    app_name: &'a str,
    elements: &'a [GuiElement],
    visible: &'a [String],
}

#[derive(Deserialize)]
struct RawScreen {
    screen_id: String,
    app_name: String,
    elements: Vec<RawElement>,
    visible: Vec<String>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

#[derive(Deserialize)]
struct RawElement {
    #[serde(flatten)]
    element: GuiElement,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoElements,
    EmptyElementId { index: usize },
    DuplicateElementId(String),
    EmptySlotId { element: String },
    DuplicateSlotId(String),
    RadioWithoutChoices { element: String },
    TooFewChoices { element: String, count: usize },
    ChoicesOnNonRadio { element: String, category: String },
    UnknownVisible(String),
    DuplicateVisible(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoElements => write!(f, "screen has no elements"),
            Violation::EmptyElementId { index } => write!(f, "elements[{index}] has an empty id"),
            Violation::DuplicateElementId(id) => write!(f, "element id `{id}` is used more than once"),
            Violation::EmptySlotId { element } => write!(f, "element `{element}` has an empty slot_id"),
            Violation::DuplicateSlotId(slot) => write!(f, "slot_id `{slot}` is filled by more than one element"),
            Violation::RadioWithoutChoices { element } => {
                write!(f, "radio button `{element}` has no choices")
            }
            Violation::TooFewChoices { element, count } => {
                write!(f, "radio button `{element}` has {count} choice(s), needs at least 2")
            }
            Violation::ChoicesOnNonRadio { element, category } => {
                write!(f, "element `{element}` of category {category} lists choices")
            }
            Violation::UnknownVisible(id) => write!(f, "visible id `{id}` is not an element"),
            Violation::DuplicateVisible(id) => write!(f, "visible id `{id}` is listed twice"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("{path}: cannot read screen file: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed screen file at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid screen: {}", join_violations(.0))]
    Validation(Vec<Violation>),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Non-fatal findings while loading a screen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScreenWarning {
    UnknownKey { locus: String, key: String },
    UnknownButtonConcept { element: String, concept: String },
    UnknownIconClass { element: String, class: String },
}

impl fmt::Display for ScreenWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScreenWarning::UnknownKey { locus, key } => write!(f, "{locus}: ignoring unknown key `{key}`"),
            ScreenWarning::UnknownButtonConcept { element, concept } => {
                write!(f, "element `{element}`: button concept `{concept}` is not in the concept table")
            }
            ScreenWarning::UnknownIconClass { element, class } => {
                write!(f, "element `{element}`: icon class `{class}` is not in the icon table")
            }
        }
    }
}

impl Screen {
    pub fn new(
        screen_id: impl Into<String>,
        app_name: impl Into<String>,
        elements: Vec<GuiElement>,
        visible: Vec<String>,
    ) -> Result<Self, ScreenError> {
        let screen = Screen {
            screen_id: screen_id.into(),
            app_name: app_name.into(),
            elements,
            visible,
        };
        let violations = screen.violations();
        if violations.is_empty() {
            Ok(screen)
        } else {
            Err(ScreenError::Validation(violations))
        }
    }

    /// Like [`Screen::new`] with every element visible.
    pub fn all_visible(
        screen_id: impl Into<String>,
        app_name: impl Into<String>,
        elements: Vec<GuiElement>,
    ) -> Result<Self, ScreenError> {
        let visible = elements.iter().map(|e| e.element_id.clone()).collect();
        Screen::new(screen_id, app_name, elements, visible)
    }

    pub fn screen_id(&self) -> &str {
        &self.screen_id
    }

    pub fn app_name(&self) -> &str {
        &self.app_name
    }

    pub fn elements(&self) -> &[GuiElement] {
        &self.elements
    }

    pub fn visible(&self) -> &[String] {
        &self.visible
    }

    pub fn element(&self, element_id: &str) -> Option<&GuiElement> {
        self.elements.iter().find(|e| e.element_id == element_id)
    }

    pub fn element_for_slot(&self, slot_id: &str) -> Option<&GuiElement> {
        self.elements.iter().find(|e| e.slot_id == slot_id)
    }

    /// Position of an element in declaration order.
    pub fn ordinal(&self, element_id: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.element_id == element_id)
    }

    pub fn slot_ids(&self) -> impl Iterator<Item = &str> {
        self.elements.iter().map(|e| e.slot_id.as_str())
    }

    /// Copy of this screen with a different visible set.
    pub fn with_visible(&self, visible: Vec<String>) -> Result<Screen, ScreenError> {
        Screen::new(
            self.screen_id.clone(),
            self.app_name.clone(),
            self.elements.clone(),
            visible,
        )
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.elements.is_empty() {
            out.push(Violation::NoElements);
        }
        let mut ids = HashSet::new();
        let mut slots = HashSet::new();
        for (index, e) in self.elements.iter().enumerate() {
            if e.element_id.is_empty() {
                out.push(Violation::EmptyElementId { index });
            } else if !ids.insert(e.element_id.as_str()) {
                out.push(Violation::DuplicateElementId(e.element_id.clone()));
            }
            if e.slot_id.trim().is_empty() {
                out.push(Violation::EmptySlotId {
                    element: e.element_id.clone(),
                });
            } else if !slots.insert(e.slot_id.as_str()) {
                out.push(Violation::DuplicateSlotId(e.slot_id.clone()));
            }
            match (&e.category, e.choices.len()) {
                (GuiCategory::RadioButton, 0) => out.push(Violation::RadioWithoutChoices {
                    element: e.element_id.clone(),
                }),
                (GuiCategory::RadioButton, 1) => out.push(Violation::TooFewChoices {
                    element: e.element_id.clone(),
                    count: 1,
                }),
                (GuiCategory::RadioButton, _) | (_, 0) => {}
                (other, _) => out.push(Violation::ChoicesOnNonRadio {
                    element: e.element_id.clone(),
                    category: other.name().to_string(),
                }),
            }
        }
        let mut seen = HashSet::new();
        for id in &self.visible {
            if !ids.contains(id.as_str()) {
                out.push(Violation::UnknownVisible(id.clone()));
            } else if !seen.insert(id.as_str()) {
                out.push(Violation::DuplicateVisible(id.clone()));
            }
        }
        out
    }

    /// Checks button concepts and icon classes against the shipped
    /// vocabularies. Findings are warnings only.
    pub fn vocabulary_warnings(&self, vocab: &Vocabulary) -> Vec<ScreenWarning> {
        let mut out = Vec::new();
        for e in &self.elements {
            if let Some(concept) = &e.button_concept {
                if !vocab.has_button_concept(concept) {
                    out.push(ScreenWarning::UnknownButtonConcept {
                        element: e.element_id.clone(),
                        concept: concept.clone(),
                    });
                }
            }
            if let Some(class) = &e.icon_class {
                if !vocab.has_icon_class(class) {
                    out.push(ScreenWarning::UnknownIconClass {
                        element: e.element_id.clone(),
                        class: class.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let repr = ScreenRepr {
            screen_id: &self.screen_id,
            app_name: &self.app_name,
            elements: &self.elements,
            visible: &self.visible,
        };
        let mut s = serde_json::to_string_pretty(&repr).expect("screen serializes");
        s.push('\n');
        s
    }
}

impl Serialize for Screen {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ScreenRepr {
            screen_id: &self.screen_id,
            app_name: &self.app_name,
            elements: &self.elements,
            visible: &self.visible,
        }
        .serialize(serializer)
    }
}

/// Elements whose ids are visible, in declaration order.
pub fn visible_elements(screen: &Screen) -> Vec<&GuiElement> {
    let visible: HashSet<&str> = screen.visible.iter().map(String::as_str).collect();
    screen
        .elements
        .iter()
        .filter(|e| visible.contains(e.element_id.as_str()))
        .collect()
}

/// Parses and validates screen JSON, returning the screen together with any
/// unknown-key warnings.
pub fn parse_screen(text: &str) -> Result<(Screen, Vec<ScreenWarning>), ScreenError> {
    let raw: RawScreen = serde_json::from_str(text).map_err(|e| ScreenError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut warnings: Vec<ScreenWarning> = raw
        .extra
        .keys()
        .map(|key| ScreenWarning::UnknownKey {
            locus: "screen".to_string(),
            key: key.clone(),
        })
        .collect();
    let mut elements = Vec::with_capacity(raw.elements.len());
    for (i, re) in raw.elements.into_iter().enumerate() {
        warnings.extend(re.extra.keys().map(|key| ScreenWarning::UnknownKey {
            locus: format!("elements[{i}]"),
            key: key.clone(),
        }));
        elements.push(re.element);
    }
    let screen = Screen::new(raw.screen_id, raw.app_name, elements, raw.visible)?;
    Ok((screen, warnings))
}

/// Reads a screen file, logging warnings for unknown keys and out-of-table
/// concepts or icon classes.
pub fn load_screen(path: impl AsRef<Path>) -> Result<Screen, ScreenError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScreenError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let (screen, mut warnings) = parse_screen(&text)?;
    warnings.extend(screen.vocabulary_warnings(Vocabulary::bundled()));
    for w in warnings {
        log::warn!("{}: {}", path.display(), w);
    }
    Ok(screen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(id: &str, slot: &str) -> GuiElement {
        GuiElement::new(id, GuiCategory::TextField, format!("label {id}"), slot)
    }

    fn three() -> Screen {
        Screen::all_visible("s", "App", vec![el("e1", "a"), el("e2", "b"), el("e3", "c")]).unwrap()
    }

    #[test]
    fn category_names_round_trip() {
        for cat in GuiCategory::named() {
            assert_eq!(GuiCategory::from_name(cat.name()), cat);
        }
        assert_eq!(GuiCategory::from_name("On/Off Switch"), GuiCategory::OnOffSwitch);
        assert_eq!(GuiCategory::from_name("radio_button"), GuiCategory::RadioButton);
        assert_eq!(GuiCategory::from_name("Multi-Tab"), GuiCategory::TabButton);
    }

    #[test]
    fn unknown_category_is_kept() {
        let cat = GuiCategory::from_name("SwapIcon");
        assert_eq!(cat, GuiCategory::Other("SwapIcon".into()));
        assert_eq!(cat.name(), "SwapIcon");
    }

    #[test]
    fn visible_selection() {
        let s = three();
        let ids: Vec<_> = visible_elements(&s).iter().map(|e| e.element_id.as_str()).collect();
        assert_eq!(ids, ["e1", "e2", "e3"]);

        let none = s.with_visible(vec![]).unwrap();
        assert!(visible_elements(&none).is_empty());

        let one = s.with_visible(vec!["e2".into()]).unwrap();
        let ids: Vec<_> = visible_elements(&one).iter().map(|e| e.element_id.as_str()).collect();
        assert_eq!(ids, ["e2"]);
    }

    #[test]
    fn visible_keeps_declaration_order() {
        let s = three().with_visible(vec!["e3".into(), "e1".into()]).unwrap();
        let ids: Vec<_> = visible_elements(&s).iter().map(|e| e.element_id.as_str()).collect();
        assert_eq!(ids, ["e1", "e3"]);
    }

    #[test]
    fn radio_without_choices_is_rejected() {
        let json = r#"{"screen_id":"s","app_name":"a","visible":["r"],
            "elements":[{"id":"r","category":"RadioButton","label":"Kind","slot_id":"kind"}]}"#;
        match parse_screen(json) {
            Err(ScreenError::Validation(v)) => {
                assert_eq!(v, vec![Violation::RadioWithoutChoices { element: "r".into() }])
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_visible_id_is_rejected() {
        let json = r#"{"screen_id":"s","app_name":"a","visible":["e1","ghost"],
            "elements":[{"id":"e1","category":"TextField","label":"Name","slot_id":"name"}]}"#;
        match parse_screen(json) {
            Err(ScreenError::Validation(v)) => assert_eq!(v, vec![Violation::UnknownVisible("ghost".into())]),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let json = r#"{"screen_id":"s","app_name":"a","visible":["x"],
            "elements":[
              {"id":"e1","category":"TextField","label":"A","slot_id":"","choices":["p","q"]},
              {"id":"e1","category":"RadioButton","label":"B","slot_id":"b","choices":["only"]}
            ]}"#;
        let Err(ScreenError::Validation(v)) = parse_screen(json) else {
            panic!("expected validation error");
        };
        assert_eq!(v.len(), 5, "{v:?}");
    }

    #[test]
    fn malformed_json_reports_locus() {
        let json = "{\n  \"screen_id\": \"s\",\n  \"app_name\": 3\n}";
        match parse_screen(json) {
            Err(ScreenError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("invalid type"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let missing = r#"{"screen_id":"s","app_name":"a","visible":[],"elements":[{"id":"e","category":"Icon"}]}"#;
        let Err(ScreenError::Parse { message, .. }) = parse_screen(missing) else {
            panic!("expected parse error");
        };
        assert!(message.contains("slot_id"), "{message}");
    }

    #[test]
    fn unknown_keys_warn() {
        let json = r#"{"screen_id":"s","app_name":"a","visible":[],"bounds":[0,0],
            "elements":[{"id":"e1","category":"TextField","label":"A","slot_id":"a","color":"red"}]}"#;
        let (_, warnings) = parse_screen(json).unwrap();
        assert_eq!(
            warnings,
            vec![
                ScreenWarning::UnknownKey { locus: "screen".into(), key: "bounds".into() },
                ScreenWarning::UnknownKey { locus: "elements[0]".into(), key: "color".into() },
            ]
        );
    }

    fn arb_element(i: usize) -> impl Strategy<Value = GuiElement> {
        let cats = prop_oneof![
            Just(GuiCategory::TextField),
            Just(GuiCategory::TextButton),
            Just(GuiCategory::Icon),
            Just(GuiCategory::RadioButton),
            "[A-Z][a-z]{2,8}Widget".prop_map(GuiCategory::Other),
        ];
        (
            cats,
            "[ -~]{0,20}",
            prop::collection::vec("[A-Za-z ]{1,10}", 2..5),
            prop::option::of("[a-z]{2,8}"),
            prop::option::of("[a-z_]{2,8}"),
        )
            .prop_map(move |(category, label, choices, concept, icon)| {
                let choices = if category == GuiCategory::RadioButton { choices } else { vec![] };
                GuiElement {
                    element_id: format!("e{i}"),
                    category,
                    label,
                    choices,
                    button_concept: concept,
                    icon_class: icon,
                    slot_id: format!("slot_{i}"),
                }
            })
    }

    fn arb_screen() -> impl Strategy<Value = Screen> {
        (1usize..6)
            .prop_flat_map(|n| {
                let elems: Vec<_> = (0..n).map(arb_element).collect();
                (elems, prop::collection::vec(any::<bool>(), n), "[a-z]{1,8}", "[ -~]{0,12}")
            })
            .prop_map(|(elements, mask, id, app)| {
                let visible = elements
                    .iter()
                    .zip(mask)
                    .filter(|(_, m)| *m)
                    .map(|(e, _)| e.element_id.clone())
                    .collect();
                Screen::new(id, app, elements, visible).unwrap()
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_is_identity(screen in arb_screen()) {
            let (back, warnings) = parse_screen(&screen.to_json()).unwrap();
            prop_assert!(warnings.is_empty());
            prop_assert_eq!(back, screen);
        }

        #[test]
        fn category_parse_is_stable(name in "[ -~]{0,16}") {
            let cat = GuiCategory::from_name(&name);
            prop_assert_eq!(GuiCategory::from_name(cat.name()), cat);
        }
    }
}
