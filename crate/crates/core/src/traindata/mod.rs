//! Rule-based weak supervision: keyword-relevant line selection and SQuAD /
//! MRPC trainfile construction.
//!
//! The pipeline is deterministic end to end. Line selection keeps the
//! sentences where a recognized entity co-occurs with a synonym of the
//! keyword; when a context has no entities at all, any sentence mentioning a
//! synonym is kept instead.

mod entities;
mod mrpc;
mod sentences;
mod squad;

use std::io;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use entities::{AnnotatedRecognizer, Entity, EntityRecognizer, RuleRecognizer, RULE_LABEL};
pub use mrpc::{build_mrpc, validate_mrpc, MrpcFile, MrpcPair, MrpcReport, MRPC_HEADER};
pub use sentences::{split_sentences, Sentence, SentenceSplitter};
pub use squad::{build_squad, validate_squad, SquadAnswer, SquadFile, SquadReport, SquadTriplet};

use crate::lexicon::KeywordLexicon;

#[derive(Debug, Error)]
pub enum TrainDataError {
    #[error("malformed annotations: {0}")]
    MalformedAnnotations(String),
    #[error("no triplets produced; check that the lexicon matches the queries and corpus")]
    NoTriplets,
    #[error("SQuAD file has no triplets")]
    EmptySquad,
    #[error("malformed SQuAD file: {0}")]
    MalformedSquad(String),
    #[error("malformed MRPC file: {0}")]
    MalformedMrpc(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

/// Hex SHA-256 over the parts joined by U+001F.
pub fn content_hash(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            h.update([0x1f]);
        }
        h.update(p.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Sentences and entities of one context, computed once and reused across
/// keywords and queries.
pub(crate) struct ContextAnalysis {
    pub sentences: Vec<Sentence>,
    pub entities: Vec<Entity>,
}

impl ContextAnalysis {
    pub(crate) fn new(
        context: &str,
        recognizer: &dyn EntityRecognizer,
        splitter: &SentenceSplitter,
    ) -> Result<Self, TrainDataError> {
        Ok(Self { sentences: splitter.split(context), entities: recognizer.recognize(context)? })
    }

    /// Indices of the selected sentences, ascending.
    pub(crate) fn select(&self, keyword: &str, lex: &KeywordLexicon) -> Vec<usize> {
        let mentions: Vec<bool> = self.sentences.iter().map(|s| lex.mentions(&s.text, keyword)).collect();
        if self.entities.is_empty() {
            return (0..self.sentences.len()).filter(|&i| mentions[i]).collect();
        }
        let mut keep = vec![false; self.sentences.len()];
        for e in &self.entities {
            if let Some(i) = self.sentences.iter().position(|s| s.start_char <= e.start && e.start < s.end_char) {
                keep[i] |= mentions[i];
            }
        }
        (0..keep.len()).filter(|&i| keep[i]).collect()
    }
}

/// Sentences of `context` holding an entity relevant to `keyword`.
pub fn select_keyword_lines(
    context: &str,
    keyword: &str,
    lex: &KeywordLexicon,
    recognizer: &dyn EntityRecognizer,
    splitter: &SentenceSplitter,
) -> Result<Vec<Sentence>, TrainDataError> {
    let analysis = ContextAnalysis::new(context, recognizer, splitter)?;
    Ok(analysis.select(keyword, lex).into_iter().map(|i| analysis.sentences[i].clone()).collect())
}
