//! Keyword lexicon, query keyword extraction, embedding-based rewriting of
//! unseen queries and proper-noun extraction.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, BufRead};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{trimmed_tokens, words, Span};

pub const DEFAULT_CUTOFF: f64 = 0.75;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("malformed lexicon: {0}")]
    Malformed(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

/// On-disk shape: `{"keywords": [..], "mapping": {"kw": ["syn", ..]}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconFile {
    pub keywords: Vec<String>,
    #[serde(default)]
    pub mapping: BTreeMap<String, Vec<String>>,
}

/// Canonical keywords and a synonym-to-keyword map. Stored forms are
/// lowercase; every keyword maps to itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordLexicon {
    keywords: Vec<String>,
    // synonyms per keyword, in declaration order, keyword itself first
    synonyms: Vec<Vec<String>>,
    synonym_map: BTreeMap<String, String>,
    // first word of each synonym -> (synonym words, keyword index)
    by_first_word: HashMap<String, Vec<(Vec<String>, usize)>>,
}

fn normalize(s: &str) -> Vec<String> {
    words(s).into_iter().map(|w| w.text.to_lowercase()).collect()
}

impl KeywordLexicon {
    pub fn new(keywords: &[String], mapping: &BTreeMap<String, Vec<String>>) -> Result<Self, LexiconError> {
        let mut kw_norm: Vec<String> = Vec::with_capacity(keywords.len());
        for k in keywords {
            let n = normalize(k).join(" ");
            if n.is_empty() {
                return Err(LexiconError::Malformed(format!("keyword {k:?} has no words")));
            }
            if kw_norm.contains(&n) {
                return Err(LexiconError::Malformed(format!("duplicate keyword {n:?}")));
            }
            kw_norm.push(n);
        }

        let mut synonyms: Vec<Vec<String>> = kw_norm.iter().map(|k| vec![k.clone()]).collect();
        let mut synonym_map: BTreeMap<String, String> = kw_norm.iter().map(|k| (k.clone(), k.clone())).collect();
        for (target, syns) in mapping {
            let target_n = normalize(target).join(" ");
            let Some(ki) = kw_norm.iter().position(|k| *k == target_n) else {
                return Err(LexiconError::Malformed(format!("mapping target {target:?} is not a keyword")));
            };
            for syn in syns {
                let syn_n = normalize(syn).join(" ");
                if syn_n.is_empty() {
                    return Err(LexiconError::Malformed(format!("synonym {syn:?} has no words")));
                }
                match synonym_map.get(&syn_n) {
                    Some(existing) if *existing != target_n => {
                        return Err(LexiconError::Malformed(format!(
                            "synonym {syn_n:?} maps to both {existing:?} and {target_n:?}"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        synonym_map.insert(syn_n.clone(), target_n.clone());
                        synonyms[ki].push(syn_n);
                    }
                }
            }
        }

        let mut by_first_word: HashMap<String, Vec<(Vec<String>, usize)>> = HashMap::new();
        for (ki, syns) in synonyms.iter().enumerate() {
            for s in syns {
                let ws: Vec<String> = s.split(' ').map(str::to_string).collect();
                by_first_word.entry(ws[0].clone()).or_default().push((ws, ki));
            }
        }
        // longest synonym first so multi-word entries win over their prefixes
        for v in by_first_word.values_mut() {
            v.sort_by_key(|e| std::cmp::Reverse(e.0.len()));
        }

        Ok(Self { keywords: kw_norm, synonyms, synonym_map, by_first_word })
    }

    pub fn from_file_repr(f: &LexiconFile) -> Result<Self, LexiconError> {
        Self::new(&f.keywords, &f.mapping)
    }

    pub fn from_json(s: &str) -> Result<Self, LexiconError> {
        let f: LexiconFile = serde_json::from_str(s).map_err(|e| LexiconError::Malformed(e.to_string()))?;
        Self::from_file_repr(&f)
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_file_repr(&self) -> LexiconFile {
        LexiconFile {
            keywords: self.keywords.clone(),
            mapping: self.keywords.iter().cloned().zip(self.synonyms.iter().cloned()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file_repr()).expect("lexicon serializes")
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn synonym_map(&self) -> &BTreeMap<String, String> {
        &self.synonym_map
    }

    /// Synonyms of a canonical keyword, the keyword itself included.
    pub fn synonyms_of(&self, keyword: &str) -> Option<&[String]> {
        let k = keyword.to_lowercase();
        self.keywords.iter().position(|x| *x == k).map(|i| self.synonyms[i].as_slice())
    }

    pub fn canonical(&self, synonym: &str) -> Option<&str> {
        self.synonym_map.get(&synonym.to_lowercase()).map(String::as_str)
    }

    /// Synonym occurrences in `text` as (first word, last word exclusive, keyword index),
    /// scanning left to right without overlaps.
    fn matches(&self, ws: &[Span<'_>]) -> Vec<(usize, usize, usize)> {
        let lower: Vec<String> = ws.iter().map(|w| w.text.to_lowercase()).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < lower.len() {
            let hit = self.by_first_word.get(&lower[i]).and_then(|cands| {
                cands.iter().find(|(syn, _)| lower[i..].starts_with(syn)).map(|(syn, k)| (syn.len(), *k))
            });
            match hit {
                Some((len, k)) => {
                    out.push((i, i + len, k));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    /// True when any synonym of `keyword` occurs as whole words in `text`.
    pub fn mentions(&self, text: &str, keyword: &str) -> bool {
        let k = keyword.to_lowercase();
        let Some(ki) = self.keywords.iter().position(|x| *x == k) else {
            return false;
        };
        let ws = words(text);
        let lower: Vec<String> = ws.iter().map(|w| w.text.to_lowercase()).collect();
        self.synonyms[ki].iter().any(|syn| {
            let sw: Vec<&str> = syn.split(' ').collect();
            lower.windows(sw.len()).any(|win| win.iter().zip(&sw).all(|(a, b)| a == b))
        })
    }
}

/// Canonical keywords whose synonyms occur in `query`, in order of first
/// occurrence, deduplicated.
pub fn extract_keywords(query: &str, lex: &KeywordLexicon) -> Vec<String> {
    let mut seen = HashSet::new();
    lex.matches(&words(query))
        .into_iter()
        .filter(|(_, _, k)| seen.insert(*k))
        .map(|(_, _, k)| lex.keywords[k].clone())
        .collect()
}

/// Word similarity provider. `None` means at least one word is out of
/// vocabulary.
pub trait EmbeddingProvider: Send + Sync {
    fn similarity(&self, a: &str, b: &str) -> Option<f64>;
}

/// Fixed table of pairwise similarities. Lookups are symmetric and
/// case-insensitive; identical words score 1.
#[derive(Debug, Clone, Default)]
pub struct StaticSimilarity {
    table: HashMap<(String, String), f64>,
}

impl StaticSimilarity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, a: &str, b: &str, sim: f64) -> Self {
        self.insert(a, b, sim);
        self
    }

    pub fn insert(&mut self, a: &str, b: &str, sim: f64) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        let key = if a <= b { (a, b) } else { (b, a) };
        self.table.insert(key, sim);
    }

    fn knows(&self, w: &str) -> bool {
        self.table.keys().any(|(a, b)| a == w || b == w)
    }
}

impl EmbeddingProvider for StaticSimilarity {
    fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        if a == b {
            return self.knows(&a).then_some(1.0);
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        self.table.get(&key).copied()
    }
}

/// Dense word vectors in the word2vec/GloVe text format, compared by cosine.
#[derive(Debug, Clone, Default)]
pub struct WordVectors {
    vectors: HashMap<String, Vec<f32>>,
}

impl WordVectors {
    /// Reads `word v1 v2 ...` lines. A leading `count dim` header line is
    /// skipped; lines of the wrong width are rejected.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let mut parts = line.split_whitespace();
            let Some(word) = parts.next() else { continue };
            let vals: Result<Vec<f32>, _> = parts.map(str::parse::<f32>).collect();
            let vals = vals.map_err(|e| LexiconError::Malformed(format!("vector line {}: {e}", i + 1)))?;
            if i == 0 && vals.len() == 1 && word.parse::<usize>().is_ok() {
                continue;
            }
            match dim {
                None => dim = Some(vals.len()),
                Some(d) if d != vals.len() => {
                    return Err(LexiconError::Malformed(format!("vector line {}: expected {d} values", i + 1)))
                }
                _ => {}
            }
            let norm = vals.iter().map(|v| v * v).sum::<f32>().sqrt();
            if norm > 0.0 {
                vectors.insert(word.to_lowercase(), vals.into_iter().map(|v| v / norm).collect());
            }
        }
        Ok(Self { vectors })
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        Self::from_reader(io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl EmbeddingProvider for WordVectors {
    fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let va = self.vectors.get(&a.to_lowercase())?;
        let vb = self.vectors.get(&b.to_lowercase())?;
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
        Some(dot.clamp(-1.0, 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Substitution {
    pub original: String,
    pub keyword: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewriteResult {
    pub rewritten_query: String,
    pub substitutions: Vec<Substitution>,
    pub matched_keywords: Vec<String>,
}

/// Replaces each query word that is not already a synonym by its most
/// similar keyword when that similarity reaches `cutoff`. Ties go to the
/// keyword listed first.
pub fn rewrite_unseen_query(
    query: &str,
    lex: &KeywordLexicon,
    emb: &dyn EmbeddingProvider,
    cutoff: f64,
) -> RewriteResult {
    let ws = words(query);
    let mut covered = vec![false; ws.len()];
    for (s, e, _) in lex.matches(&ws) {
        covered[s..e].iter_mut().for_each(|c| *c = true);
    }

    let mut rewritten = String::with_capacity(query.len());
    let mut substitutions = Vec::new();
    let mut last = 0;
    for (w, _) in ws.iter().zip(&covered).filter(|(_, c)| !**c) {
        let mut best: Option<(usize, f64)> = None;
        for (ki, kw) in lex.keywords.iter().enumerate() {
            if let Some(sim) = emb.similarity(w.text, kw) {
                if best.is_none_or(|(_, b)| sim > b) {
                    best = Some((ki, sim));
                }
            }
        }
        if let Some((ki, sim)) = best.filter(|(_, s)| *s >= cutoff) {
            rewritten.push_str(&query[last..w.start]);
            rewritten.push_str(&lex.keywords[ki]);
            last = w.end;
            substitutions.push(Substitution {
                original: w.text.to_string(),
                keyword: lex.keywords[ki].clone(),
                similarity: sim,
            });
        }
    }
    rewritten.push_str(&query[last..]);
    let matched_keywords = extract_keywords(&rewritten, lex);
    RewriteResult { rewritten_query: rewritten, substitutions, matched_keywords }
}

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "an", "and", "any", "are", "as", "at", "be", "before", "between", "but", "by",
    "can", "could", "did", "do", "does", "during", "for", "from", "has", "have", "how", "i", "if", "in", "into",
    "is", "it", "its", "may", "more", "most", "no", "not", "of", "on", "or", "other", "should", "so", "some",
    "than", "that", "the", "their", "there", "these", "they", "this", "those", "to", "was", "we", "were", "what",
    "when", "where", "which", "who", "why", "will", "with", "would",
];

pub fn is_stopword(w: &str) -> bool {
    STOPWORDS.binary_search(&w.to_lowercase().as_str()).is_ok()
}

/// Capitalization-shape heuristic shared by proper-noun and entity rules:
/// contains a digit, an uppercase letter after the first character, or is
/// all caps of length two or more.
pub(crate) fn has_marked_shape(tok: &str) -> bool {
    tok.chars().any(|c| c.is_ascii_digit() || c.is_numeric())
        || tok.chars().skip(1).any(char::is_uppercase)
}

pub(crate) fn is_capitalized(tok: &str) -> bool {
    tok.chars().next().is_some_and(char::is_uppercase)
}

/// Tokens that look like proper nouns or codes: capitalized words past the
/// first position that are not stopwords, tokens with digits or internal
/// capitals, and all-caps tokens. Order preserved, deduplicated.
pub fn extract_proper_nouns(query: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    trimmed_tokens(query)
        .into_iter()
        .enumerate()
        .filter(|(i, t)| {
            let tok = t.text;
            let all_caps = tok.chars().count() >= 2
                && tok.chars().any(char::is_alphabetic)
                && tok.chars().filter(|c| c.is_alphabetic()).all(char::is_uppercase);
            has_marked_shape(tok) || all_caps || (*i > 0 && is_capitalized(tok) && !is_stopword(tok))
        })
        .map(|(_, t)| t.text.to_string())
        .filter(|t| seen.insert(t.clone()))
        .collect()
}
