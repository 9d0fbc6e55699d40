use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{content_hash, SentenceSplitter, TrainDataError};
use crate::lexicon::{has_marked_shape, is_capitalized};
use crate::text::{char_len, slice_chars, whitespace_tokens, CharMap};

pub const RULE_LABEL: &str = "RULE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub text: String,
    /// Char offsets into the recognized text.
    pub start: usize,
    pub end: usize,
    pub label: String,
}

pub trait EntityRecognizer: Send + Sync {
    fn recognize(&self, text: &str) -> Result<Vec<Entity>, TrainDataError>;
}

/// Shape-based recognizer: maximal runs of tokens that are capitalized away
/// from a sentence start, carry digits or internal capitals, or appear in the
/// configured term list.
#[derive(Debug, Clone, Default)]
pub struct RuleRecognizer {
    terms: HashSet<String>,
    splitter: SentenceSplitter,
}

impl RuleRecognizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_terms<S: AsRef<str>>(mut self, terms: impl IntoIterator<Item = S>) -> Self {
        self.terms.extend(terms.into_iter().map(|t| t.as_ref().to_lowercase()));
        self
    }

    pub fn with_splitter(mut self, splitter: SentenceSplitter) -> Self {
        self.splitter = splitter;
        self
    }

    pub fn recognize_rules(&self, text: &str) -> Vec<Entity> {
        let map = CharMap::new(text);
        let sentence_starts: HashSet<usize> = self
            .splitter
            .split(text)
            .iter()
            .map(|s| crate::text::byte_offset(text, s.start_char).unwrap_or(0))
            .collect();

        let mut out = Vec::new();
        // (start byte, end byte, may extend)
        let mut run: Option<(usize, usize, bool)> = None;
        let flush = |run: &mut Option<(usize, usize, bool)>, out: &mut Vec<Entity>| {
            if let Some((s, e, _)) = run.take() {
                out.push(Entity {
                    text: text[s..e].to_string(),
                    start: map.char_at(s),
                    end: map.char_at(e),
                    label: RULE_LABEL.to_string(),
                });
            }
        };

        for tok in whitespace_tokens(text) {
            let initial = sentence_starts.contains(&tok.start);
            let lead = tok.text.len() - tok.text.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
            let core = tok.text[lead..].trim_end_matches(|c: char| !c.is_alphanumeric());
            if core.is_empty() {
                flush(&mut run, &mut out);
                continue;
            }
            let qualifies = has_marked_shape(core)
                || (is_capitalized(core) && !initial)
                || self.terms.contains(&core.to_lowercase());
            if !qualifies {
                flush(&mut run, &mut out);
                continue;
            }
            let (s, e) = (tok.start + lead, tok.start + lead + core.len());
            let clean_tail = e == tok.end;
            match run.as_mut() {
                Some(r) if r.2 && lead == 0 && !initial => {
                    r.1 = e;
                    r.2 = clean_tail;
                }
                _ => {
                    flush(&mut run, &mut out);
                    run = Some((s, e, clean_tail));
                }
            }
        }
        flush(&mut run, &mut out);
        out
    }
}

impl EntityRecognizer for RuleRecognizer {
    fn recognize(&self, text: &str) -> Result<Vec<Entity>, TrainDataError> {
        Ok(self.recognize_rules(text))
    }
}

#[derive(Deserialize)]
struct AnnotationRecord {
    context_hash: String,
    entities: Vec<Entity>,
}

/// Entities supplied by an external annotations file keyed by context hash.
/// Contexts without annotations fall back to the rule recognizer.
#[derive(Debug, Clone, Default)]
pub struct AnnotatedRecognizer {
    by_hash: HashMap<String, Vec<Entity>>,
    fallback: RuleRecognizer,
}

impl AnnotatedRecognizer {
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, TrainDataError> {
        let mut by_hash: HashMap<String, Vec<Entity>> = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: AnnotationRecord = serde_json::from_str(&line)
                .map_err(|e| TrainDataError::MalformedAnnotations(format!("line {}: {e}", i + 1)))?;
            for ent in &rec.entities {
                if ent.start >= ent.end || ent.end - ent.start != char_len(&ent.text) {
                    return Err(TrainDataError::MalformedAnnotations(format!(
                        "line {}: entity {:?} has offsets {}..{}",
                        i + 1,
                        ent.text,
                        ent.start,
                        ent.end
                    )));
                }
            }
            by_hash.entry(rec.context_hash).or_default().extend(rec.entities);
        }
        Ok(Self { by_hash, fallback: RuleRecognizer::default() })
    }

    pub fn load(path: &Path) -> Result<Self, TrainDataError> {
        Self::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn with_fallback(mut self, fallback: RuleRecognizer) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn len(&self) -> usize {
        self.by_hash.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_hash.is_empty()
    }
}

impl EntityRecognizer for AnnotatedRecognizer {
    fn recognize(&self, text: &str) -> Result<Vec<Entity>, TrainDataError> {
        let Some(ents) = self.by_hash.get(&content_hash(&[text])) else {
            return self.fallback.recognize(text);
        };
        for e in ents {
            if slice_chars(text, e.start, e.end) != Some(e.text.as_str()) {
                return Err(TrainDataError::MalformedAnnotations(format!(
                    "entity {:?} at {}..{} does not match its context",
                    e.text, e.start, e.end
                )));
            }
        }
        let mut ents = ents.clone();
        ents.sort_by_key(|e| (e.start, e.end));
        Ok(ents)
    }
}
