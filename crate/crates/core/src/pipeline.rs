//! Shared configuration for the retrieval and QA pipelines: scorer backends,
//! optional query rewriting and the worker pool.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::lexicon::{rewrite_unseen_query, EmbeddingProvider, KeywordLexicon, RewriteResult, DEFAULT_CUTOFF};
use crate::scoring::{LexicalParaphraseScorer, LexicalSpanExtractor, ParaphraseScorer, ScoringError, SpanExtractor};

pub const DEFAULT_PN_WEIGHT: f64 = 0.3;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("k must be at least 1")]
    InvalidK,
    #[error("every chunk failed to score: {0}")]
    AllChunksFailed(ScoringError),
    #[error("could not start worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

/// The two stage backends.
#[derive(Clone)]
pub struct Scorers {
    pub extractor: Arc<dyn SpanExtractor>,
    pub paraphraser: Arc<dyn ParaphraseScorer>,
}

impl Scorers {
    pub fn new(extractor: Arc<dyn SpanExtractor>, paraphraser: Arc<dyn ParaphraseScorer>) -> Self {
        Self { extractor, paraphraser }
    }

    pub fn lexical() -> Self {
        Self::new(Arc::new(LexicalSpanExtractor::default()), Arc::new(LexicalParaphraseScorer))
    }
}

/// Embedding-based keyword substitution applied to incoming queries.
#[derive(Clone)]
pub struct QueryRewriter {
    pub lexicon: Arc<KeywordLexicon>,
    pub embeddings: Arc<dyn EmbeddingProvider>,
    pub cutoff: f64,
}

impl QueryRewriter {
    pub fn new(lexicon: Arc<KeywordLexicon>, embeddings: Arc<dyn EmbeddingProvider>) -> Self {
        Self { lexicon, embeddings, cutoff: DEFAULT_CUTOFF }
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn rewrite(&self, query: &str) -> RewriteResult {
        rewrite_unseen_query(query, &self.lexicon, self.embeddings.as_ref(), self.cutoff)
    }
}

/// Runs per-item work sequentially (one worker) or on a dedicated pool.
/// Output order always matches input order.
pub(crate) struct Executor {
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub(crate) fn new(workers: usize) -> Result<Self, PipelineError> {
        let pool = match workers {
            1 => None,
            n => Some(rayon::ThreadPoolBuilder::new().num_threads(n).build()?),
        };
        Ok(Self { pool })
    }

    pub(crate) fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        match &self.pool {
            None => items.iter().map(f).collect(),
            Some(pool) => pool.install(|| items.par_iter().map(f).collect()),
        }
    }
}

/// A configured retrieval/QA engine. See [`Pipeline::retrieve`] and
/// [`Pipeline::answer`].
pub struct Pipeline {
    pub(crate) scorers: Scorers,
    pub(crate) rewriter: Option<QueryRewriter>,
    pub(crate) pn_weight: f64,
    pub(crate) executor: Executor,
}

impl Pipeline {
    /// Sequential pipeline without rewriting.
    pub fn new(scorers: Scorers) -> Self {
        Self { scorers, rewriter: None, pn_weight: DEFAULT_PN_WEIGHT, executor: Executor { pool: None } }
    }

    pub fn lexical() -> Self {
        Self::new(Scorers::lexical())
    }

    /// `0` uses one thread per core.
    pub fn with_workers(mut self, workers: usize) -> Result<Self, PipelineError> {
        self.executor = Executor::new(workers)?;
        Ok(self)
    }

    pub fn with_rewriter(mut self, rewriter: QueryRewriter) -> Self {
        self.rewriter = Some(rewriter);
        self
    }

    pub fn with_pn_weight(mut self, pn_weight: f64) -> Self {
        self.pn_weight = pn_weight;
        self
    }

    pub fn scorers(&self) -> &Scorers {
        &self.scorers
    }

    pub fn pn_weight(&self) -> f64 {
        self.pn_weight
    }

    pub(crate) fn effective_query(&self, query: &str) -> (String, Option<RewriteResult>) {
        match &self.rewriter {
            Some(rw) => {
                let r = rw.rewrite(query);
                (r.rewritten_query.clone(), Some(r))
            }
            None => (query.to_string(), None),
        }
    }
}
