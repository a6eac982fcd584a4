//! CoNLL-style BIO corpora: one `token<TAB>tag` per line, blank lines between
//! utterances, and an optional `# id: <utterance_id>` line before each one.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use super::{AnnotatedUtterance, SlotFill, Token};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BioOptions {
    /// Reject `I-x` tags that do not continue an `x` run instead of opening
    /// a new run.
    pub strict: bool,
}

#[derive(Debug, Error)]
pub enum BioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: tag `{tag}` does not continue a `{expected}` run")]
    TagSequence { line: usize, tag: String, expected: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

enum Tag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

fn parse_tag(tag: &str) -> Option<Tag<'_>> {
    match tag {
        "O" => Some(Tag::Outside),
        _ => {
            let (prefix, name) = tag.split_at_checked(2)?;
            if name.is_empty() {
                return None;
            }
            match prefix {
                "B-" => Some(Tag::Begin(name)),
                "I-" => Some(Tag::Inside(name)),
                _ => None,
            }
        }
    }
}

#[derive(Default)]
struct Pending {
    id: Option<String>,
    tokens: Vec<String>,
    /// (slot, first token, last token exclusive)
    runs: Vec<(String, usize, usize)>,
    open: bool,
}

impl Pending {
    fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn finish(self, index: usize) -> AnnotatedUtterance {
        let mut text = String::new();
        let mut tokens = Vec::with_capacity(self.tokens.len());
        let mut offset = 0;
        for (i, tok) in self.tokens.into_iter().enumerate() {
            if i > 0 {
                text.push(' ');
                offset += 1;
            }
            text.push_str(&tok);
            let len = tok.chars().count();
            tokens.push(Token { text: tok, start: offset });
            offset += len;
        }
        let slots = self
            .runs
            .into_iter()
            .map(|(slot_id, first, last)| {
                let start_char = tokens[first].start;
                let end_char = tokens[last - 1].end();
                let surface = tokens[first..last]
                    .iter()
                    .map(|t| t.text.as_str())
                    .collect::<Vec<_>>()
                    .join(" ");
                SlotFill {
                    slot_id,
                    start_char,
                    end_char,
                    surface,
                }
            })
            .collect();
        AnnotatedUtterance {
            utterance_id: self.id.unwrap_or_else(|| format!("utt{index}")),
            text,
            tokens,
            slots,
        }
    }
}

/// Parses a BIO corpus. Utterance text is the tokens joined by single spaces
/// and all offsets refer to that text. Lines that start with `#` and contain
/// no tab are comments.
pub fn parse_bio_corpus<R: BufRead>(reader: R, opts: BioOptions) -> Result<Vec<AnnotatedUtterance>, BioError> {
    let mut out = Vec::new();
    let mut cur = Pending::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur).finish(out.len()));
            }
            continue;
        }
        if line.starts_with('#') && !line.contains('\t') {
            if let Some(id) = line[1..].trim().strip_prefix("id:") {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur).finish(out.len()));
                }
                cur.id = Some(id.trim().to_string());
            }
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(token), Some(tag), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(BioError::Parse {
                line: line_no,
                message: "expected `token<TAB>tag`".into(),
            });
        };
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(BioError::Parse {
                line: line_no,
                message: format!("token `{token}` is empty or contains whitespace"),
            });
        }
        let tag = tag.trim();
        let Some(parsed) = parse_tag(tag) else {
            return Err(BioError::Parse {
                line: line_no,
                message: format!("tag `{tag}` is not O, B-x or I-x"),
            });
        };
        let idx = cur.tokens.len();
        cur.tokens.push(token.to_string());
        match parsed {
            Tag::Outside => cur.open = false,
            Tag::Begin(name) => {
                cur.runs.push((name.to_string(), idx, idx + 1));
                cur.open = true;
            }
            Tag::Inside(name) => {
                let continues = cur.open && cur.runs.last().is_some_and(|(slot, _, _)| slot == name);
                if continues {
                    cur.runs.last_mut().expect("open run").2 = idx + 1;
                } else if opts.strict {
                    let expected = match cur.runs.last() {
                        Some((slot, _, _)) if cur.open => slot.clone(),
                        _ => "O".to_string(),
                    };
                    return Err(BioError::TagSequence {
                        line: line_no,
                        tag: tag.to_string(),
                        expected,
                    });
                } else {
                    log::debug!("line {line_no}: dangling `{tag}` opens a new run");
                    cur.runs.push((name.to_string(), idx, idx + 1));
                    cur.open = true;
                }
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur.finish(out.len()));
    }
    Ok(out)
}

pub fn parse_bio_str(text: &str, opts: BioOptions) -> Result<Vec<AnnotatedUtterance>, BioError> {
    parse_bio_corpus(text.as_bytes(), opts)
}

pub fn read_bio_file(path: impl AsRef<Path>, opts: BioOptions) -> Result<Vec<AnnotatedUtterance>, BioError> {
    parse_bio_corpus(BufReader::new(File::open(path)?), opts)
}

/// Writes utterances back out in the format [`parse_bio_corpus`] reads.
pub fn render_conll(utts: &[AnnotatedUtterance]) -> String {
    let mut out = String::new();
    for (i, u) in utts.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("# id: ");
        out.push_str(&u.utterance_id);
        out.push('\n');
        for (tok, tag) in u.tokens.iter().zip(u.token_tags()) {
            out.push_str(&tok.text);
            out.push('\t');
            out.push_str(&tag);
            out.push('\n');
        }
    }
    out
}
