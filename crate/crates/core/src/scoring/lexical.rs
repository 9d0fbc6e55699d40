use super::{ParaphraseScorer, ScoredSpan, ScoringError, SpanExtractor};
use crate::text::lexical_token_set;
use crate::traindata::SentenceSplitter;

/// Returns the earliest context sentence with the largest share of query
/// tokens; the share is the span score. No shared token gives the empty span.
pub fn lexical_extract_span(query: &str, context: &str) -> ScoredSpan {
    LexicalSpanExtractor::default().extract_span(query, context)
}

/// Jaccard similarity of lowercase token sets.
pub fn lexical_paraphrase_score(a: &str, b: &str) -> f64 {
    let (sa, sb) = (lexical_token_set(a), lexical_token_set(b));
    match (sa.is_empty(), sb.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => {
            let inter = sa.intersection(&sb).count();
            let union = sa.len() + sb.len() - inter;
            inter as f64 / union as f64
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LexicalSpanExtractor {
    splitter: SentenceSplitter,
}

impl LexicalSpanExtractor {
    pub fn new(splitter: SentenceSplitter) -> Self {
        Self { splitter }
    }

    pub fn extract_span(&self, query: &str, context: &str) -> ScoredSpan {
        let q = lexical_token_set(query);
        let denom = q.len().max(1) as f64;
        let mut best: Option<(usize, ScoredSpan)> = None;
        for s in self.splitter.split(context) {
            let shared = lexical_token_set(&s.text).intersection(&q).count();
            if shared > 0 && best.as_ref().is_none_or(|(b, _)| shared > *b) {
                let span = ScoredSpan { text: s.text, start_char: s.start_char, end_char: s.end_char, score: shared as f64 / denom };
                best = Some((shared, span));
            }
        }
        best.map_or_else(ScoredSpan::empty, |(_, s)| s)
    }
}

impl SpanExtractor for LexicalSpanExtractor {
    fn extract(&self, query: &str, context: &str) -> Result<ScoredSpan, ScoringError> {
        Ok(self.extract_span(query, context))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalParaphraseScorer;

impl ParaphraseScorer for LexicalParaphraseScorer {
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoringError> {
        Ok(lexical_paraphrase_score(a, b))
    }
}
