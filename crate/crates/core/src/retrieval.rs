//! Two-stage literature retrieval: span extraction per chunk, paraphrase
//! scoring of the span against the query, an optional proper-noun blend, then
//! max-aggregation per document and ranking.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::Serialize;

use crate::corpus::{Chunk, CorpusIndex};
use crate::lexicon::{extract_proper_nouns, RewriteResult};
use crate::pipeline::{Pipeline, PipelineError, Scorers};
use crate::scoring::{ParaphraseScorer, ScoredSpan, ScoringError, SpanExtractor};
use crate::text::trimmed_tokens;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChunkScore {
    pub doc_id: String,
    pub chunk_index: usize,
    pub span: ScoredSpan,
    pub paraphrase_score: f64,
    pub final_score: f64,
}

impl ChunkScore {
    fn failed(chunk: &Chunk) -> Self {
        Self {
            doc_id: chunk.doc_id.clone(),
            chunk_index: chunk.chunk_index,
            span: ScoredSpan::empty(),
            paraphrase_score: 0.0,
            final_score: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedDocument {
    pub doc_id: String,
    pub doc_score: f64,
    pub best_chunk_index: usize,
    pub best_span: ScoredSpan,
}

/// A chunk whose scorer call failed; it scored 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkFailure {
    pub doc_id: String,
    pub chunk_index: usize,
    pub error: ScoringError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    /// The query after rewriting, as scored.
    pub query: String,
    pub rewrite: Option<RewriteResult>,
    pub results: Vec<RankedDocument>,
    pub failures: Vec<ChunkFailure>,
}

/// Blends `base` with the share of query proper nouns found, case-sensitively
/// and as whole words, in `chunk_text`. Without proper nouns `base` is
/// returned unchanged.
pub fn combine_scores(base: f64, query: &str, chunk_text: &str, pn_weight: f64) -> f64 {
    combine_with_nouns(base, &extract_proper_nouns(query), chunk_text, pn_weight)
}

fn combine_with_nouns(base: f64, nouns: &[String], chunk_text: &str, pn_weight: f64) -> f64 {
    if nouns.is_empty() {
        return base;
    }
    let words: HashSet<&str> = trimmed_tokens(chunk_text).into_iter().map(|t| t.text).collect();
    let matched = nouns.iter().filter(|n| words.contains(n.as_str())).count();
    let blended = (1.0 - pn_weight) * base + pn_weight * (matched as f64 / nouns.len() as f64);
    blended.clamp(0.0, 1.0)
}

fn score_chunk_with(
    query: &str,
    nouns: &[String],
    chunk: &Chunk,
    extractor: &dyn SpanExtractor,
    paraphraser: &dyn ParaphraseScorer,
    pn_weight: f64,
) -> Result<ChunkScore, ScoringError> {
    let span = extractor.extract(query, &chunk.text)?;
    let paraphrase_score = if span.is_empty() { 0.0 } else { paraphraser.score(query, &span.text)? };
    let final_score = combine_with_nouns(paraphrase_score, nouns, &chunk.text, pn_weight);
    Ok(ChunkScore { doc_id: chunk.doc_id.clone(), chunk_index: chunk.chunk_index, span, paraphrase_score, final_score })
}

/// Scores one chunk: stage one extracts a span, stage two scores the span
/// against the query, and the proper-noun blend gives the final score.
pub fn score_chunk(
    query: &str,
    chunk: &Chunk,
    extractor: &dyn SpanExtractor,
    paraphraser: &dyn ParaphraseScorer,
    pn_weight: f64,
) -> Result<ChunkScore, ScoringError> {
    score_chunk_with(query, &extract_proper_nouns(query), chunk, extractor, paraphraser, pn_weight)
}

/// Max over chunk scores, ties to the lowest chunk index. When every chunk
/// scores 0 the best span is the empty span. `scores` must be non-empty.
pub fn aggregate_document(scores: &[ChunkScore]) -> RankedDocument {
    let mut best = &scores[0];
    for s in &scores[1..] {
        if s.final_score > best.final_score || (s.final_score == best.final_score && s.chunk_index < best.chunk_index) {
            best = s;
        }
    }
    if best.final_score == 0.0 {
        let first = scores.iter().min_by_key(|s| s.chunk_index).unwrap_or(best);
        return RankedDocument {
            doc_id: first.doc_id.clone(),
            doc_score: 0.0,
            best_chunk_index: first.chunk_index,
            best_span: ScoredSpan::empty(),
        };
    }
    RankedDocument {
        doc_id: best.doc_id.clone(),
        doc_score: best.final_score,
        best_chunk_index: best.chunk_index,
        best_span: best.span.clone(),
    }
}

/// Scores every chunk of one document sequentially and aggregates.
pub fn score_document(
    query: &str,
    chunks: &[Chunk],
    scorers: &Scorers,
    pn_weight: f64,
) -> Result<RankedDocument, ScoringError> {
    let nouns = extract_proper_nouns(query);
    let scores = chunks
        .iter()
        .map(|c| score_chunk_with(query, &nouns, c, scorers.extractor.as_ref(), scorers.paraphraser.as_ref(), pn_weight))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate_document(&scores))
}

fn rank_order(a: &RankedDocument, b: &RankedDocument) -> Ordering {
    b.doc_score.total_cmp(&a.doc_score).then_with(|| a.doc_id.cmp(&b.doc_id))
}

/// Sorts by score descending, then doc id ascending, and keeps the top `k`.
pub fn rank_documents(mut docs: Vec<RankedDocument>, k: usize) -> Vec<RankedDocument> {
    docs.sort_by(rank_order);
    docs.truncate(k);
    docs
}

/// Sequential retrieval with the given scorers and default settings.
pub fn retrieve(query: &str, corpus: &CorpusIndex, scorers: &Scorers, k: usize) -> Result<Retrieval, PipelineError> {
    Pipeline::new(scorers.clone()).retrieve(query, corpus, k)
}

impl Pipeline {
    /// Ranks the corpus documents for `query` and returns the top `k`.
    ///
    /// Chunks whose scorer call fails score 0 and are listed in
    /// [`Retrieval::failures`]; if no chunk scores at all the first error is
    /// returned instead.
    pub fn retrieve(&self, query: &str, corpus: &CorpusIndex, k: usize) -> Result<Retrieval, PipelineError> {
        if k == 0 {
            return Err(PipelineError::InvalidK);
        }
        if corpus.is_empty() {
            return Err(PipelineError::EmptyCorpus);
        }
        let (query, rewrite) = self.effective_query(query);
        let nouns = extract_proper_nouns(&query);
        let chunks: Vec<&Chunk> = corpus.chunks().collect();
        let (ex, pp) = (self.scorers.extractor.as_ref(), self.scorers.paraphraser.as_ref());
        let scored = self.executor.map(&chunks, |c| score_chunk_with(&query, &nouns, c, ex, pp, self.pn_weight));

        let mut failures = Vec::new();
        let mut chunk_scores = Vec::with_capacity(scored.len());
        for (chunk, res) in chunks.iter().zip(scored) {
            match res {
                Ok(s) => chunk_scores.push(s),
                Err(error) => {
                    failures.push(ChunkFailure { doc_id: chunk.doc_id.clone(), chunk_index: chunk.chunk_index, error });
                    chunk_scores.push(ChunkScore::failed(chunk));
                }
            }
        }
        if failures.len() == chunks.len() {
            return Err(PipelineError::AllChunksFailed(failures.swap_remove(0).error));
        }

        let mut docs = Vec::with_capacity(corpus.num_docs());
        let mut rest = chunk_scores.as_slice();
        for d in corpus.docs().iter().filter(|d| !d.chunks.is_empty()) {
            let (mine, tail) = rest.split_at(d.chunks.len());
            docs.push(aggregate_document(mine));
            rest = tail;
        }
        Ok(Retrieval { query, rewrite, results: rank_documents(docs, k), failures })
    }
}
