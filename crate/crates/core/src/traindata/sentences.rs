use serde::{Deserialize, Serialize};

use crate::text::CharMap;

/// A sentence with char offsets into the text it was split from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub start_char: usize,
    pub end_char: usize,
}

const DEFAULT_ABBREVIATIONS: &[&str] =
    &["approx", "cf", "dr", "e.g", "eq", "et al", "fig", "figs", "i.e", "no", "ref", "refs", "sp", "spp", "vs"];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];

/// Deterministic rule-based sentence splitter.
///
/// A boundary follows a run of `.`, `?` or `!` (plus any closing quotes or
/// brackets) when the next thing is whitespace and then an uppercase letter or
/// the end of the text. A `.` that ends a protected abbreviation never splits.
#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: Vec<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<S: AsRef<str>>(abbrevs: impl IntoIterator<Item = S>) -> Self {
        Self {
            abbreviations: abbrevs
                .into_iter()
                .map(|a| a.as_ref().trim().trim_end_matches('.').to_lowercase())
                .filter(|a| !a.is_empty())
                .collect(),
        }
    }

    pub fn abbreviations(&self) -> &[String] {
        &self.abbreviations
    }

    fn is_protected(&self, before: &str) -> bool {
        // `before` is the text up to (not including) the terminating '.'
        let lower = before.to_lowercase();
        self.abbreviations.iter().any(|abbr| {
            lower.ends_with(abbr.as_str())
                && lower[..lower.len() - abbr.len()]
                    .chars()
                    .next_back()
                    .is_none_or(|c| c.is_whitespace() || !c.is_alphanumeric() && c != '.')
        })
    }

    /// Byte ranges of the sentences in `text`.
    fn boundaries(&self, text: &str) -> Vec<(usize, usize)> {
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let mut out = Vec::new();
        let mut sent_start: Option<usize> = None;
        let mut i = 0;
        while i < chars.len() {
            let (b, c) = chars[i];
            if sent_start.is_none() && !c.is_whitespace() {
                sent_start = Some(b);
            }
            if !matches!(c, '.' | '?' | '!') {
                i += 1;
                continue;
            }
            let mut j = i;
            while j < chars.len() && matches!(chars[j].1, '.' | '?' | '!') {
                j += 1;
            }
            let lone_period = c == '.' && j == i + 1;
            while j < chars.len() && CLOSERS.contains(&chars[j].1) {
                j += 1;
            }
            let term_end = chars.get(j).map_or(text.len(), |x| x.0);
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let splits = if j == chars.len() || k == chars.len() {
                true
            } else {
                k > j && chars[k].1.is_uppercase()
            };
            // only a lone '.' can be an abbreviation terminator
            let abbrev = lone_period && self.is_protected(&text[..b]);
            if splits && !abbrev {
                if let Some(s) = sent_start.take() {
                    out.push((s, term_end));
                }
            }
            i = j;
        }
        if let Some(s) = sent_start {
            let end = s + text[s..].trim_end().len();
            if end > s {
                out.push((s, end));
            }
        }
        out
    }

    pub fn split(&self, text: &str) -> Vec<Sentence> {
        let map = CharMap::new(text);
        self.boundaries(text)
            .into_iter()
            .map(|(s, e)| Sentence { text: text[s..e].to_string(), start_char: map.char_at(s), end_char: map.char_at(e) })
            .collect()
    }
}

/// Splits with the default abbreviation list.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    SentenceSplitter::default().split(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::slice_chars;

    fn texts(s: &str) -> Vec<String> {
        split_sentences(s).into_iter().map(|x| x.text).collect()
    }

    #[test]
    fn two_simple_sentences() {
        let s = split_sentences("A b. C d.");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], Sentence { text: "A b.".into(), start_char: 0, end_char: 4 });
        assert_eq!(s[1], Sentence { text: "C d.".into(), start_char: 5, end_char: 9 });
    }

    #[test]
    fn abbreviations_protected() {
        assert_eq!(texts("See Fig. 2 here."), ["See Fig. 2 here."]);
        assert_eq!(texts("As in Fig. B the rate rose. Then it fell."), ["As in Fig. B the rate rose.", "Then it fell."]);
        assert_eq!(texts("Smith et al. Found it. Next."), ["Smith et al. Found it.", "Next."]);
        assert_eq!(texts("Drugs, e.g. Remdesivir, help."), ["Drugs, e.g. Remdesivir, help."]);
        assert_eq!(texts("Patient no. Seven recovered."), ["Patient no. Seven recovered."]);
        // 'info.' is not 'no.'
        assert_eq!(texts("Get info. Then go."), ["Get info.", "Then go."]);
    }

    #[test]
    fn empty_and_whitespace() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n ").is_empty());
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        assert_eq!(texts("It rose by 5. then fell."), ["It rose by 5. then fell."]);
        assert_eq!(texts("Value 2.5 reported. Done"), ["Value 2.5 reported.", "Done"]);
    }

    #[test]
    fn question_marks_and_closers() {
        assert_eq!(texts("Why?! Because (it works.) Yes"), ["Why?!", "Because (it works.)", "Yes"]);
        assert_eq!(texts("in 2012 . The WHO said ."), ["in 2012 .", "The WHO said ."]);
    }

    #[test]
    fn offsets_are_chars() {
        let t = "Dose 5 µg. Next one.";
        for s in split_sentences(t) {
            assert_eq!(slice_chars(t, s.start_char, s.end_char), Some(s.text.as_str()));
        }
    }
}
