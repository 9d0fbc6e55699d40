//! Extractive QA: every chunk goes through the span extractor and the best
//! span over the whole corpus is the answer.

use serde::Serialize;

use crate::corpus::{Chunk, CorpusIndex};
use crate::lexicon::RewriteResult;
use crate::pipeline::{Pipeline, PipelineError, Scorers};
use crate::retrieval::ChunkFailure;
use crate::scoring::{ScoredSpan, SpanExtractor};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QAResult {
    pub answer: ScoredSpan,
    pub doc_id: String,
    pub chunk_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub query: String,
    pub rewrite: Option<RewriteResult>,
    pub result: QAResult,
    pub failures: Vec<ChunkFailure>,
}

/// Argmax over (chunk, span) pairs in corpus order; corpus order is doc id
/// then chunk index, so strict improvement implements the tie rule.
fn best_of<'a>(spans: impl Iterator<Item = (&'a Chunk, ScoredSpan)>) -> Option<QAResult> {
    let mut first: Option<&Chunk> = None;
    let mut best: Option<(&Chunk, ScoredSpan)> = None;
    for (chunk, span) in spans {
        first.get_or_insert(chunk);
        if best.as_ref().is_none_or(|(_, b)| span.score > b.score) {
            best = Some((chunk, span));
        }
    }
    let (chunk, span) = best?;
    if span.score == 0.0 {
        let c = first.unwrap_or(chunk);
        return Some(QAResult { answer: ScoredSpan::empty(), doc_id: c.doc_id.clone(), chunk_index: c.chunk_index });
    }
    Some(QAResult { answer: span, doc_id: chunk.doc_id.clone(), chunk_index: chunk.chunk_index })
}

/// Sequential QA over `corpus` with `extractor`.
pub fn answer(query: &str, corpus: &CorpusIndex, extractor: std::sync::Arc<dyn SpanExtractor>) -> Result<Answer, PipelineError> {
    let scorers = Scorers { extractor, ..Scorers::lexical() };
    Pipeline::new(scorers).answer(query, corpus)
}

impl Pipeline {
    /// The globally best-scoring span for `query`. Chunks that fail to score
    /// count as score 0 and are reported.
    pub fn answer(&self, query: &str, corpus: &CorpusIndex) -> Result<Answer, PipelineError> {
        if corpus.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        let (query, rewrite) = self.effective_query(query);
        let chunks: Vec<&Chunk> = corpus.chunks().collect();
        let ex = self.scorers.extractor.as_ref();
        let spans = self.executor.map(&chunks, |c| ex.extract(&query, &c.text));

        let mut failures = Vec::new();
        let scored: Vec<(&Chunk, ScoredSpan)> = chunks
            .iter()
            .zip(spans)
            .map(|(c, res)| match res {
                Ok(s) => (*c, s),
                Err(error) => {
                    failures.push(ChunkFailure { doc_id: c.doc_id.clone(), chunk_index: c.chunk_index, error });
                    (*c, ScoredSpan::empty())
                }
            })
            .collect();
        if failures.len() == chunks.len() {
            return Err(PipelineError::AllChunksFailed(failures.swap_remove(0).error));
        }
        let result = best_of(scored.into_iter()).ok_or(PipelineError::EmptyCorpus)?;
        Ok(Answer { query, rewrite, result, failures })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::LexicalSpanExtractor;
    use std::sync::Arc;

    fn chunk(doc: &str, i: usize, text: &str) -> Chunk {
        Chunk { doc_id: doc.into(), chunk_index: i, start_char: 0, text: text.into() }
    }

    fn lexical() -> Arc<dyn SpanExtractor> {
        Arc::new(LexicalSpanExtractor::default())
    }

    #[test]
    fn identity_sentence() {
        let corpus = CorpusIndex::from_chunks([
            chunk("d1", 0, "Some words about coronavirus."),
            chunk("d2", 0, "Intro. Where is coronavirus found? Outro."),
        ]);
        let a = answer("Where is coronavirus found?", &corpus, lexical()).unwrap().result;
        assert_eq!(a.answer.text, "Where is coronavirus found?");
        assert_eq!(a.answer.score, 1.0);
        assert_eq!((a.doc_id.as_str(), a.chunk_index), ("d2", 0));
    }

    #[test]
    fn tie_goes_to_lowest_doc_id() {
        let corpus = CorpusIndex::from_chunks([chunk("b", 0, "alpha gamma."), chunk("a", 0, "alpha delta.")]);
        let a = answer("alpha beta", &corpus, lexical()).unwrap().result;
        assert_eq!(a.answer.score, 0.5);
        assert_eq!(a.doc_id, "a");
    }

    #[test]
    fn unanswerable_gives_empty_answer() {
        let corpus = CorpusIndex::from_chunks([chunk("x", 0, "no overlap."), chunk("y", 0, "none here.")]);
        let a = answer("zebra", &corpus, lexical()).unwrap().result;
        assert_eq!(a, QAResult { answer: ScoredSpan::empty(), doc_id: "x".into(), chunk_index: 0 });
        assert!(matches!(answer("q", &CorpusIndex::default(), lexical()), Err(PipelineError::EmptyCorpus)));
    }
}
