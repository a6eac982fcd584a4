//! Rule-based question generation from GUI elements.
//!
//! Each element category maps to one question template:
//!
//! | category                               | template                              |
//! |----------------------------------------|---------------------------------------|
//! | TextField and everything not below     | `What is the {label}?`                |
//! | RadioButton                            | `Is this {c1}, {c2}, ... or {cn}?`    |
//! | TextButton, Checkbox, OnOffSwitch      | `What should I do to {label}?`        |
//!
//! Labels have a leading command verb ("Select", "Enter", ...) removed and are
//! lowercased; radio choices are inserted verbatim. An [`OverrideTable`] can
//! replace the template for a specific label or button concept.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::screen::{visible_elements, GuiCategory, GuiElement, Screen};

pub const DEFAULT_COMMAND_VERBS: &[&str] = &["select", "enter", "choose", "pick", "type", "set"];

/// Which visual information reaches the question text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// Category-specific templates.
    #[default]
    Full,
    /// Every element is treated as a text field.
    TextOnly,
    /// Opaque tag symbols that carry no label semantics.
    NoVisuals,
}

impl AblationMode {
    pub const ALL: [AblationMode; 3] = [AblationMode::Full, AblationMode::TextOnly, AblationMode::NoVisuals];

    pub fn as_str(self) -> &'static str {
        match self {
            AblationMode::Full => "full",
            AblationMode::TextOnly => "text",
            AblationMode::NoVisuals => "novis",
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "full" | "gui" => Ok(AblationMode::Full),
            "text" | "textonly" => Ok(AblationMode::TextOnly),
            "novis" | "novisuals" => Ok(AblationMode::NoVisuals),
            _ => Err(format!("unknown ablation mode `{s}` (expected full, text or novis)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub slot_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_element: Option<String>,
    /// Fixture metadata; never consulted by the pipeline.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub expected_answerable: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuestionError {
    #[error("element `{element}` (slot `{slot_id}`) has no usable label for its question template")]
    EmptyLabel { element: String, slot_id: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OverrideError {
    #[error("override table line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Removes one leading command verb (case-insensitive) from a label, using
/// the default verb list.
pub fn strip_command_prefix(label: &str) -> String {
    strip_command_prefix_with(label, DEFAULT_COMMAND_VERBS)
}

pub fn strip_command_prefix_with<S: AsRef<str>>(label: &str, verbs: &[S]) -> String {
    let trimmed = label.trim();
    let first_end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
    let first = &trimmed[..first_end];
    if verbs.iter().any(|v| v.as_ref().eq_ignore_ascii_case(first)) {
        trimmed[first_end..].trim().to_string()
    } else {
        trimmed.to_string()
    }
}

/// Opaque per-slot tag used by the no-visuals ablation.
pub fn tag_symbol(ordinal: usize) -> String {
    format!("XYZ{ordinal}")
}

fn join_choices(choices: &[String]) -> String {
    match choices {
        [] => String::new(),
        [only] => only.clone(),
        [init @ .., last] => format!("{} or {}", init.join(", "), last),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Selector {
    Concept(String),
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct OverrideRule {
    category: GuiCategory,
    selector: Selector,
    template: String,
}

/// Per-element template overrides.
///
/// Tab-separated rows of `category`, `label:<exact label>` or
/// `concept:<button concept>`, and a template. Templates may use `{label}`
/// (prepared label) and `{choices}` (joined choices) and must end in `?`.
/// A label rule wins over a concept rule for the same element.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverrideTable {
    rules: Vec<OverrideRule>,
}

impl OverrideTable {
    pub fn parse(text: &str) -> Result<Self, OverrideError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            let [category, selector, template] = cols[..] else {
                return Err(OverrideError::Parse {
                    line,
                    message: format!("expected 3 tab-separated columns, found {}", cols.len()),
                });
            };
            let selector = if let Some(label) = selector.strip_prefix("label:") {
                Selector::Label(label.trim().to_string())
            } else if let Some(concept) = selector.strip_prefix("concept:") {
                Selector::Concept(concept.trim().to_ascii_lowercase())
            } else {
                return Err(OverrideError::Parse {
                    line,
                    message: format!("selector `{selector}` must start with `label:` or `concept:`"),
                });
            };
            let template = template.trim();
            if !template.ends_with('?') {
                return Err(OverrideError::Parse {
                    line,
                    message: format!("template `{template}` must end with `?`"),
                });
            }
            rules.push(OverrideRule {
                category: GuiCategory::from_name(category),
                selector,
                template: template.to_string(),
            });
        }
        Ok(OverrideTable { rules })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn lookup(&self, category: &GuiCategory, element: &GuiElement) -> Option<&str> {
        let label = element.label.trim();
        let by_label = self.rules.iter().find(|r| {
            &r.category == category && matches!(&r.selector, Selector::Label(l) if l == label)
        });
        let by_concept = || {
            let concept = element.button_concept.as_deref()?.trim().to_ascii_lowercase();
            self.rules.iter().find(|r| {
                &r.category == category && matches!(&r.selector, Selector::Concept(c) if *c == concept)
            })
        };
        by_label.or_else(by_concept).map(|r| r.template.as_str())
    }
}

enum Template {
    TextField,
    Radio,
    Action,
}

fn template_for(category: &GuiCategory) -> Template {
    match category {
        GuiCategory::RadioButton => Template::Radio,
        GuiCategory::TextButton | GuiCategory::Checkbox | GuiCategory::OnOffSwitch => Template::Action,
        _ => Template::TextField,
    }
}

/// Translates elements into questions. Cheap to clone and `Sync`.
#[derive(Debug, Clone)]
pub struct QuestionGenerator {
    command_verbs: Vec<String>,
    overrides: OverrideTable,
}

impl Default for QuestionGenerator {
    fn default() -> Self {
        QuestionGenerator {
            command_verbs: DEFAULT_COMMAND_VERBS.iter().map(|v| v.to_string()).collect(),
            overrides: OverrideTable::default(),
        }
    }
}

impl QuestionGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_overrides(mut self, overrides: OverrideTable) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn with_command_verbs<I, S>(mut self, verbs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.command_verbs = verbs.into_iter().map(Into::into).collect();
        self
    }

    pub fn command_verbs(&self) -> &[String] {
        &self.command_verbs
    }

    fn prepared_label(&self, element: &GuiElement) -> Result<String, QuestionError> {
        let stripped = strip_command_prefix_with(&element.label, &self.command_verbs);
        let label = stripped.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        if label.is_empty() {
            Err(QuestionError::EmptyLabel {
                element: element.element_id.clone(),
                slot_id: element.slot_id.clone(),
            })
        } else {
            Ok(label)
        }
    }

    /// Question for one element. `ordinal` is the element's stable position
    /// among the slots being asked about; only the no-visuals mode uses it.
    pub fn generate_question(
        &self,
        element: &GuiElement,
        mode: AblationMode,
        ordinal: usize,
    ) -> Result<Question, QuestionError> {
        let text = match mode {
            AblationMode::NoVisuals => tag_symbol(ordinal),
            AblationMode::Full => self.render(element, &element.category)?,
            AblationMode::TextOnly => self.render(element, &GuiCategory::TextField)?,
        };
        Ok(Question {
            text,
            slot_id: element.slot_id.clone(),
            source_element: Some(element.element_id.clone()),
            expected_answerable: false,
        })
    }

    fn render(&self, element: &GuiElement, category: &GuiCategory) -> Result<String, QuestionError> {
        if let Some(template) = self.overrides.lookup(category, element) {
            let mut text = template.to_string();
            if text.contains("{label}") {
                text = text.replace("{label}", &self.prepared_label(element)?);
            }
            if text.contains("{choices}") {
                text = text.replace("{choices}", &join_choices(&element.choices));
            }
            return Ok(text);
        }
        match template_for(category) {
            Template::TextField => Ok(format!("What is the {}?", self.prepared_label(element)?)),
            Template::Action => Ok(format!("What should I do to {}?", self.prepared_label(element)?)),
            Template::Radio => {
                if element.choices.is_empty() {
                    return Err(QuestionError::EmptyLabel {
                        element: element.element_id.clone(),
                        slot_id: element.slot_id.clone(),
                    });
                }
                Ok(format!("Is this {}?", join_choices(&element.choices)))
            }
        }
    }

    /// One question per visible element, in element order. Ordinals are the
    /// elements' declaration positions.
    pub fn generate_questions(&self, screen: &Screen, mode: AblationMode) -> Result<Vec<Question>, QuestionError> {
        self.generate_questions_offset(screen, mode, 0)
    }

    /// As [`generate_questions`](Self::generate_questions) with every ordinal
    /// shifted by `ordinal_offset`, so questions from several screens asked
    /// together keep distinct tag symbols.
    pub fn generate_questions_offset(
        &self,
        screen: &Screen,
        mode: AblationMode,
        ordinal_offset: usize,
    ) -> Result<Vec<Question>, QuestionError> {
        visible_elements(screen)
            .into_iter()
            .map(|e| {
                let ordinal = screen.ordinal(&e.element_id).expect("visible element is declared");
                self.generate_question(e, mode, ordinal_offset + ordinal)
            })
            .collect()
    }
}
