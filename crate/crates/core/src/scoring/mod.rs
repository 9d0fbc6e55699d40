//! Scorer contracts for the two pipeline stages and their backends.
//!
//! [`SpanExtractor`] picks the answer span of a context for a query and
//! [`ParaphraseScorer`] judges whether two texts say the same thing. The
//! lexical backends are deterministic token-overlap oracles; the remote
//! backends talk to a model-inference sidecar over HTTP.

mod lexical;
mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexical::{lexical_extract_span, lexical_paraphrase_score, LexicalParaphraseScorer, LexicalSpanExtractor};
pub use remote::{RemoteClient, RemoteOptions};

use crate::text::slice_chars;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ScoringError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("remote error {status}: {message}")]
    Remote { status: u16, message: String },
}

impl ScoringError {
    /// Transport and remote failures come from the service side; protocol
    /// failures mean the service answered with something invalid.
    pub fn is_remote_side(&self) -> bool {
        matches!(self, ScoringError::Transport(_) | ScoringError::Remote { .. })
    }
}

/// A span of a context with char offsets `[start_char, end_char)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSpan {
    pub text: String,
    pub start_char: usize,
    pub end_char: usize,
    pub score: f64,
}

impl ScoredSpan {
    /// The designated no-answer span.
    pub fn empty() -> Self {
        Self { text: String::new(), start_char: 0, end_char: 0, score: 0.0 }
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    /// Checks the span against the context it claims to come from.
    pub fn validate(&self, context: &str) -> Result<(), ScoringError> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(ScoringError::Protocol(format!("span score {} outside [0, 1]", self.score)));
        }
        if self.text.is_empty() {
            return if self.start_char == 0 && self.end_char == 0 && self.score == 0.0 {
                Ok(())
            } else {
                Err(ScoringError::Protocol("empty span must be (0, 0) with score 0".into()))
            };
        }
        if self.start_char >= self.end_char {
            return Err(ScoringError::Protocol(format!("span offsets {}..{} are not increasing", self.start_char, self.end_char)));
        }
        match slice_chars(context, self.start_char, self.end_char) {
            Some(s) if s == self.text => Ok(()),
            Some(s) => Err(ScoringError::Protocol(format!(
                "span text {:?} does not match context[{}..{}] = {s:?}",
                self.text, self.start_char, self.end_char
            ))),
            None => Err(ScoringError::Protocol(format!(
                "span offsets {}..{} exceed the context",
                self.start_char, self.end_char
            ))),
        }
    }
}

/// Stage one: extract the best answer span of `context` for `query`.
pub trait SpanExtractor: Send + Sync {
    fn extract(&self, query: &str, context: &str) -> Result<ScoredSpan, ScoringError>;
}

/// Stage two: semantic equivalence of two texts, in `[0, 1]`.
pub trait ParaphraseScorer: Send + Sync {
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoringError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_validation() {
        let ctx = "Fever and cough.";
        let ok = ScoredSpan { text: "cough".into(), start_char: 10, end_char: 15, score: 0.5 };
        assert!(ok.validate(ctx).is_ok());
        assert!(ScoredSpan::empty().validate(ctx).is_ok());
        let shifted = ScoredSpan { start_char: 9, end_char: 14, ..ok.clone() };
        assert!(matches!(shifted.validate(ctx), Err(ScoringError::Protocol(_))));
        let past = ScoredSpan { start_char: 14, end_char: 19, ..ok.clone() };
        assert!(past.validate(ctx).is_err());
        let hot = ScoredSpan { score: 1.2, ..ok.clone() };
        assert!(hot.validate(ctx).is_err());
        let odd_empty = ScoredSpan { text: String::new(), start_char: 3, end_char: 3, score: 0.0 };
        assert!(odd_empty.validate(ctx).is_err());
    }
}
