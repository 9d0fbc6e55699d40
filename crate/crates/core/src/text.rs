//! Character-offset helpers and the small tokenizers shared across modules.
//!
//! Every offset exposed by this crate counts Unicode scalar values, so that it
//! lines up with Python `str` indexing on the other side of the wire.

use std::collections::BTreeSet;

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte offset of the `char_idx`-th character (or `s.len()` at the end).
pub fn byte_offset(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut seen = 0;
    for (b, _) in s.char_indices() {
        if seen == char_idx {
            return Some(b);
        }
        seen += 1;
    }
    (seen == char_idx).then_some(s.len())
}

/// `s[start..end]` in character offsets, `None` when out of range.
pub fn slice_chars(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = byte_offset(s, start)?;
    let b1 = b0 + byte_offset(&s[b0..], end - start)?;
    Some(&s[b0..b1])
}

/// Maps byte offsets to char offsets for one string in O(1) after O(n) setup.
pub(crate) struct CharMap {
    // char offset for every byte boundary; non-boundary bytes are unused.
    at_byte: Vec<usize>,
}

impl CharMap {
    pub(crate) fn new(s: &str) -> Self {
        let mut at_byte = vec![0; s.len() + 1];
        let mut n = 0;
        for (b, c) in s.char_indices() {
            at_byte[b] = n;
            n += 1;
            for slot in &mut at_byte[b + 1..b + c.len_utf8()] {
                *slot = n;
            }
        }
        at_byte[s.len()] = n;
        Self { at_byte }
    }

    pub(crate) fn char_at(&self, byte: usize) -> usize {
        self.at_byte[byte]
    }
}

/// A token and its byte span in the source string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Span<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Maximal non-whitespace runs.
pub(crate) fn whitespace_tokens(s: &str) -> Vec<Span<'_>> {
    runs(s, |c| !c.is_whitespace())
}

/// Maximal alphanumeric runs.
pub(crate) fn alnum_runs(s: &str) -> Vec<Span<'_>> {
    runs(s, char::is_alphanumeric)
}

fn runs(s: &str, keep: impl Fn(char) -> bool) -> Vec<Span<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (b, c) in s.char_indices() {
        match (keep(c), start) {
            (true, None) => start = Some(b),
            (false, Some(st)) => {
                out.push(Span { text: &s[st..b], start: st, end: b });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push(Span { text: &s[st..], start: st, end: s.len() });
    }
    out
}

/// Lowercased alphanumeric-run token set, the unit of the lexical scorers.
pub fn lexical_token_set(s: &str) -> BTreeSet<String> {
    alnum_runs(s).into_iter().map(|t| t.text.to_lowercase()).collect()
}

/// Words for keyword matching: runs of alphanumerics, hyphens and apostrophes
/// with the joiners trimmed from both ends.
pub(crate) fn words(s: &str) -> Vec<Span<'_>> {
    runs(s, |c| c.is_alphanumeric() || c == '-' || c == '\'')
        .into_iter()
        .filter_map(|sp| trim_span(sp, |c| c == '-' || c == '\''))
        .collect()
}

/// Whitespace tokens with surrounding punctuation removed (internal
/// punctuation such as the hyphen in `nCoV-19` is kept).
pub(crate) fn trimmed_tokens(s: &str) -> Vec<Span<'_>> {
    whitespace_tokens(s)
        .into_iter()
        .filter_map(|sp| trim_span(sp, |c| !c.is_alphanumeric()))
        .collect()
}

fn trim_span(sp: Span<'_>, strip: impl Fn(char) -> bool + Copy) -> Option<Span<'_>> {
    let lead = sp.text.len() - sp.text.trim_start_matches(strip).len();
    let text = sp.text[lead..].trim_end_matches(strip);
    if text.is_empty() {
        return None;
    }
    let start = sp.start + lead;
    Some(Span { text, start, end: start + text.len() })
}
