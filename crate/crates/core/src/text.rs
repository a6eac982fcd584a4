//! Character-offset helpers. Every offset in this crate counts Unicode scalar
//! values, matching the SQuAD convention for `answer_start`.

/// A whitespace-delimited token with half-open character offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte index of character offset `char_idx`, or `None` past the end.
pub fn byte_offset(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    s.char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(s.len()))
        .nth(char_idx)
}

/// Substring by character offsets.
pub fn slice_chars(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = byte_offset(s, start)?;
    let b1 = byte_offset(s, end)?;
    Some(&s[b0..b1])
}

pub fn char_offset(s: &str, byte_idx: usize) -> usize {
    s[..byte_idx].chars().count()
}

/// Splits on Unicode whitespace, reporting character offsets.
pub fn whitespace_tokens(s: &str) -> Vec<TokenSpan<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut ci = 0;
    for (bi, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some((sb, sc)) = start.take() {
                out.push(TokenSpan {
                    text: &s[sb..bi],
                    start: sc,
                    end: ci,
                });
            }
        } else if start.is_none() {
            start = Some((bi, ci));
        }
        ci += 1;
    }
    if let Some((sb, sc)) = start {
        out.push(TokenSpan {
            text: &s[sb..],
            start: sc,
            end: ci,
        });
    }
    out
}

/// All character offsets at which `needle` occurs in `haystack`.
pub fn find_char_offsets(haystack: &str, needle: &str) -> Vec<usize> {
    if needle.is_empty() {
        return Vec::new();
    }
    haystack
        .match_indices(needle)
        .map(|(b, _)| char_offset(haystack, b))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slicing_counts_characters() {
        let s = "café to Zürich";
        assert_eq!(char_len(s), 14);
        assert_eq!(slice_chars(s, 8, 14), Some("Zürich"));
        assert_eq!(slice_chars(s, 0, 4), Some("café"));
        assert_eq!(slice_chars(s, 10, 15), None);
        assert_eq!(slice_chars(s, 3, 2), None);
        assert_eq!(slice_chars(s, 14, 14), Some(""));
    }

    #[test]
    fn tokens_with_offsets() {
        let toks = whitespace_tokens("  I am\tflying  ");
        let got: Vec<_> = toks.iter().map(|t| (t.text, t.start, t.end)).collect();
        assert_eq!(got, [("I", 2, 3), ("am", 4, 6), ("flying", 7, 13)]);
        assert!(whitespace_tokens("   ").is_empty());
    }

    #[test]
    fn finds_all_occurrences() {
        assert_eq!(find_char_offsets("ä to ä", "ä"), [0, 5]);
        assert!(find_char_offsets("abc", "").is_empty());
    }
}
