//! Loads the index and scorers described by a [`Config`] and renders
//! pipeline results as output records. The CLI and the service share it.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use litqa_core::corpus::{load_corpus, CorpusError, CorpusIndex};
use litqa_core::lexicon::{KeywordLexicon, WordVectors};
use litqa_core::pipeline::{Pipeline, PipelineError, QueryRewriter, Scorers};
use litqa_core::retrieval::ChunkFailure;
use litqa_core::scoring::{RemoteClient, RemoteOptions};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Config, ScorerKind};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Remote(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Remote(_) => 3,
            CliError::Validation(_) | CliError::Internal(_) => 1,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::EmptyCorpus => CliError::Input(e.to_string()),
            PipelineError::InvalidK => CliError::Config(e.to_string()),
            PipelineError::AllChunksFailed(_) => CliError::Remote(e.to_string()),
            PipelineError::ThreadPool(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::InvalidPolicy { .. } => CliError::Config(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrieveRecord {
    pub rank: usize,
    pub doc_id: String,
    pub score: f64,
    pub excerpt: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub doc_id: String,
    pub chunk_index: usize,
    pub answer: String,
    pub score: f64,
}

/// Result plus human-readable notes about chunks that failed to score.
#[derive(Debug, Clone, PartialEq)]
pub struct Output<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

fn warnings(failures: &[ChunkFailure]) -> Vec<String> {
    failures.iter().map(|f| format!("{} chunk {} scored 0: {}", f.doc_id, f.chunk_index, f.error)).collect()
}

pub fn build_pipeline(cfg: &Config) -> Result<Pipeline, CliError> {
    let scorers = match cfg.scorer {
        ScorerKind::Lexical => Scorers::lexical(),
        ScorerKind::Remote => {
            let endpoint = cfg.endpoint.as_deref().ok_or_else(|| CliError::Config("remote scorer needs an endpoint".into()))?;
            let opts = RemoteOptions {
                timeout: Duration::from_secs_f64(cfg.timeout_secs),
                retries: cfg.retries,
                max_in_flight: cfg.concurrency,
                ..RemoteOptions::default()
            };
            let client = Arc::new(RemoteClient::new(endpoint, opts));
            Scorers::new(client.clone(), client)
        }
    };
    let mut pipeline = Pipeline::new(scorers).with_pn_weight(cfg.pn_weight).with_workers(cfg.workers)?;
    if let (Some(lex), Some(emb)) = (&cfg.lexicon, &cfg.embeddings) {
        let lexicon = KeywordLexicon::load(lex).map_err(|e| CliError::Input(e.to_string()))?;
        let vectors = WordVectors::load(emb).map_err(|e| CliError::Input(e.to_string()))?;
        pipeline = pipeline.with_rewriter(QueryRewriter::new(Arc::new(lexicon), Arc::new(vectors)).with_cutoff(cfg.cutoff));
    }
    Ok(pipeline)
}

pub fn load_index(cfg: &Config) -> Result<CorpusIndex, CliError> {
    let path: &Path = cfg.index.as_deref().ok_or_else(|| CliError::Config("no index configured (--index or `index` in the config file)".into()))?;
    let policy = cfg.chunk_policy().map_err(CliError::Config)?;
    Ok(load_corpus(path, &policy)?)
}

pub struct Engine {
    corpus: CorpusIndex,
    pipeline: Pipeline,
    top_k: usize,
}

impl Engine {
    pub fn new(corpus: CorpusIndex, pipeline: Pipeline, top_k: usize) -> Self {
        Self { corpus, pipeline, top_k }
    }

    pub fn from_config(cfg: &Config) -> Result<Self, CliError> {
        cfg.validate().map_err(CliError::Config)?;
        let pipeline = build_pipeline(cfg)?;
        Ok(Self::new(load_index(cfg)?, pipeline, cfg.top_k))
    }

    pub fn corpus(&self) -> &CorpusIndex {
        &self.corpus
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    /// Top `k` (default from config) documents.
    pub fn retrieve(&self, query: &str, k: Option<usize>) -> Result<Output<Vec<RetrieveRecord>>, CliError> {
        let r = self.pipeline.retrieve(query, &self.corpus, k.unwrap_or(self.top_k))?;
        let value = r
            .results
            .into_iter()
            .enumerate()
            .map(|(i, d)| RetrieveRecord { rank: i + 1, doc_id: d.doc_id, score: d.doc_score, excerpt: d.best_span.text })
            .collect();
        Ok(Output { value, warnings: warnings(&r.failures) })
    }

    pub fn answer(&self, query: &str) -> Result<Output<AnswerRecord>, CliError> {
        let a = self.pipeline.answer(query, &self.corpus)?;
        let r = a.result;
        let value = AnswerRecord { doc_id: r.doc_id, chunk_index: r.chunk_index, answer: r.answer.text, score: r.answer.score };
        Ok(Output { value, warnings: warnings(&a.failures) })
    }
}

fn clip(s: &str, n: usize) -> String {
    let flat: String = s.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() <= n {
        flat
    } else {
        flat.chars().take(n.saturating_sub(1)).collect::<String>() + "…"
    }
}

pub fn render_ranking_table(records: &[RetrieveRecord]) -> String {
    let id_w = records.iter().map(|r| r.doc_id.chars().count()).max().unwrap_or(0).max(6);
    let mut out = format!("{:>4}  {:>6}  {:<id_w$}  excerpt\n", "rank", "score", "doc_id");
    for r in records {
        out += &format!("{:>4}  {:>6.4}  {:<id_w$}  {}\n", r.rank, r.score, r.doc_id, clip(&r.excerpt, 80));
    }
    out
}

pub fn render_answer_table(a: &AnswerRecord) -> String {
    format!("answer:   {}\nscore:    {:.4}\ndocument: {} (chunk {})\n", a.answer, a.score, a.doc_id, a.chunk_index)
}
