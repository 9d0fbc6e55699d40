//! Literature retrieval and extractive question answering over chunked
//! article corpora, plus rule-based generation of SQuAD and MRPC trainfiles.
//!
//! The retrieval pipeline scores every chunk in two stages (span extraction,
//! then paraphrase scoring of the span against the query), takes the maximum
//! chunk score as the document score and ranks documents by it. QA keeps the
//! single best span over the corpus. Both stages sit behind traits with a
//! deterministic lexical backend and an HTTP client for a model sidecar.

pub mod corpus;
pub mod lexicon;
pub mod pipeline;
pub mod qa;
pub mod retrieval;
pub mod scoring;
pub mod text;
pub mod traindata;

pub use corpus::{chunk_document, load_corpus, parse_document, Chunk, ChunkPolicy, CorpusIndex, Document};
pub use lexicon::{extract_keywords, extract_proper_nouns, rewrite_unseen_query, EmbeddingProvider, KeywordLexicon};
pub use pipeline::{Pipeline, PipelineError, QueryRewriter, Scorers};
pub use qa::{Answer, QAResult};
pub use retrieval::{RankedDocument, Retrieval};
pub use scoring::{ParaphraseScorer, ScoredSpan, ScoringError, SpanExtractor};
