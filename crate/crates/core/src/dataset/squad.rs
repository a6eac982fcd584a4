//! SQuAD v2 files.
//!
//! ```json
//! {"version":"v2.0","data":[{"title":..,"paragraphs":[{"context":..,
//!   "qas":[{"id":..,"question":..,"answers":[{"text":..,"answer_start":..}],"is_impossible":..}]}]}]}
//! ```
//!
//! Consecutive examples that share a context are written as one paragraph.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::slice_chars;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaAnswer {
    pub text: String,
    /// Character offset into the context.
    pub answer_start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaExample {
    pub qa_id: String,
    pub question: String,
    pub context: String,
    pub answers: Vec<QaAnswer>,
    pub is_impossible: bool,
}

impl QaExample {
    pub fn answerable(
        qa_id: impl Into<String>,
        question: impl Into<String>,
        context: impl Into<String>,
        text: impl Into<String>,
        answer_start: usize,
    ) -> Self {
        QaExample {
            qa_id: qa_id.into(),
            question: question.into(),
            context: context.into(),
            answers: vec![QaAnswer {
                text: text.into(),
                answer_start,
            }],
            is_impossible: false,
        }
    }

    pub fn impossible(qa_id: impl Into<String>, question: impl Into<String>, context: impl Into<String>) -> Self {
        QaExample {
            qa_id: qa_id.into(),
            question: question.into(),
            context: context.into(),
            answers: Vec::new(),
            is_impossible: true,
        }
    }

    pub fn validate(&self) -> Result<(), SquadError> {
        let invalid = |reason: String| SquadError::InvalidExample {
            id: self.qa_id.clone(),
            reason,
        };
        if self.is_impossible != self.answers.is_empty() {
            return Err(invalid(format!(
                "is_impossible is {} but {} answer(s) are listed",
                self.is_impossible,
                self.answers.len()
            )));
        }
        for a in &self.answers {
            let end = a.answer_start + a.text.chars().count();
            if slice_chars(&self.context, a.answer_start, end) != Some(a.text.as_str()) {
                return Err(invalid(format!(
                    "answer `{}` is not found at offset {} of the context",
                    a.text, a.answer_start
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SquadError {
    #[error("example `{id}`: {reason}")]
    InvalidExample { id: String, reason: String },
    #[error("malformed SQuAD file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported SQuAD version `{0}` (expected v2.0)")]
    Version(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct SquadFile {
    version: String,
    data: Vec<SquadArticle>,
}

#[derive(Serialize, Deserialize)]
struct SquadArticle {
    title: String,
    paragraphs: Vec<SquadParagraph>,
}

#[derive(Serialize, Deserialize)]
struct SquadParagraph {
    context: String,
    qas: Vec<SquadQa>,
}

#[derive(Serialize, Deserialize)]
struct SquadQa {
    id: String,
    question: String,
    answers: Vec<QaAnswer>,
    is_impossible: bool,
}

/// Writes compact SQuAD v2 JSON with one article named `title`.
pub fn write_squad<W: Write>(examples: &[QaExample], title: &str, writer: W) -> Result<(), SquadError> {
    for e in examples {
        e.validate()?;
    }
    let mut paragraphs: Vec<SquadParagraph> = Vec::new();
    for e in examples {
        let qa = SquadQa {
            id: e.qa_id.clone(),
            question: e.question.clone(),
            answers: e.answers.clone(),
            is_impossible: e.is_impossible,
        };
        match paragraphs.last_mut() {
            Some(p) if p.context == e.context => p.qas.push(qa),
            _ => paragraphs.push(SquadParagraph {
                context: e.context.clone(),
                qas: vec![qa],
            }),
        }
    }
    let file = SquadFile {
        version: "v2.0".into(),
        data: vec![SquadArticle {
            title: title.to_string(),
            paragraphs,
        }],
    };
    let mut writer = writer;
    serde_json::to_writer(&mut writer, &file)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn export_squad(examples: &[QaExample], title: &str, path: impl AsRef<Path>) -> Result<(), SquadError> {
    write_squad(examples, title, BufWriter::new(File::create(path)?))
}

/// Reads every question of every article, validating each example.
pub fn read_squad<R: Read>(reader: R) -> Result<Vec<QaExample>, SquadError> {
    let file: SquadFile = serde_json::from_reader(reader)?;
    if file.version != "v2.0" {
        return Err(SquadError::Version(file.version));
    }
    let mut out = Vec::new();
    for article in file.data {
        for p in article.paragraphs {
            for qa in p.qas {
                let e = QaExample {
                    qa_id: qa.id,
                    question: qa.question,
                    context: p.context.clone(),
                    answers: qa.answers,
                    is_impossible: qa.is_impossible,
                };
                e.validate()?;
                out.push(e);
            }
        }
    }
    Ok(out)
}

pub fn import_squad(path: impl AsRef<Path>) -> Result<Vec<QaExample>, SquadError> {
    read_squad(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn roundtrip(examples: &[QaExample]) -> Vec<QaExample> {
        let mut buf = Vec::new();
        write_squad(examples, "t", &mut buf).unwrap();
        read_squad(buf.as_slice()).unwrap()
    }

    #[test]
    fn empty_file() {
        let mut buf = Vec::new();
        write_squad(&[], "atis_visual", &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"version\":\"v2.0\",\"data\":[{\"title\":\"atis_visual\",\"paragraphs\":[]}]}\n"
        );
    }

    #[test]
    fn field_names_and_grouping() {
        let ctx = "fly from denver";
        let examples = vec![
            QaExample::answerable("u:from", "What is the from?", ctx, "denver", 9),
            QaExample::answerable("u:verb", "What is the verb?", ctx, "fly", 0),
            QaExample::impossible("u:to", "What is the to?", ctx),
        ];
        let mut buf = Vec::new();
        write_squad(&examples, "t", &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let paragraphs = v["data"][0]["paragraphs"].as_array().unwrap();
        assert_eq!(paragraphs.len(), 1);
        let qas = paragraphs[0]["qas"].as_array().unwrap();
        let answerable = qas.iter().filter(|q| q["is_impossible"] == false).count();
        let impossible = qas.iter().filter(|q| q["is_impossible"] == true).count();
        assert_eq!((answerable, impossible), (2, 1));
        assert_eq!(qas[0]["answers"][0]["answer_start"], 9);
        assert_eq!(qas[0]["id"], "u:from");
        assert_eq!(roundtrip(&examples), examples);
    }

    #[test]
    fn invalid_examples_are_refused() {
        let bad = QaExample::answerable("x", "q", "abc", "bd", 1);
        assert!(matches!(write_squad(&[bad], "t", Vec::new()), Err(SquadError::InvalidExample { .. })));
        let mut flag = QaExample::impossible("y", "q", "abc");
        flag.is_impossible = false;
        assert!(flag.validate().is_err());
        let v1 = r#"{"version":"1.1","data":[]}"#;
        assert!(matches!(read_squad(v1.as_bytes()), Err(SquadError::Version(_))));
    }

    fn arb_example() -> impl Strategy<Value = QaExample> {
        ("[a-zé ]{1,20}", "[a-z:0-9]{1,8}", "[A-Za-z ?]{1,20}", any::<bool>(), any::<prop::sample::Index>())
            .prop_map(|(ctx, id, q, answerable, idx)| {
                let n = ctx.chars().count();
                if answerable {
                    let start = idx.index(n);
                    let text: String = ctx.chars().skip(start).take(1 + (n - start - 1) / 2).collect();
                    QaExample::answerable(id, q, ctx, text, start)
                } else {
                    QaExample::impossible(id, q, ctx)
                }
            })
    }

    proptest! {
        #[test]
        fn export_import_round_trip(examples in prop::collection::vec(arb_example(), 0..8)) {
            prop_assert_eq!(roundtrip(&examples), examples);
        }
    }
}
