//! TOML configuration.
//!
//! ```toml
//! index = "corpus.jsonl"        # chunk index or directory of JSON records
//! scorer = "lexical"            # or "remote"
//! endpoint = "http://127.0.0.1:8000"
//! top_k = 3
//! pn_weight = 0.3
//! cutoff = 0.75
//! max_tokens = 128
//! overlap_tokens = 32
//! concurrency = 8               # remote requests in flight
//! timeout_secs = 30
//! retries = 2
//! workers = 0                   # 0 = one per core
//! lexicon = "lexicon.json"
//! embeddings = "vectors.txt"
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use litqa_core::corpus::ChunkPolicy;
use serde::Deserialize;

/// Overrides `endpoint` from the config file.
pub const ENDPOINT_ENV: &str = "COV19IR_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Lexical,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub index: Option<PathBuf>,
    pub scorer: ScorerKind,
    pub endpoint: Option<String>,
    pub top_k: usize,
    pub pn_weight: f64,
    pub cutoff: f64,
    pub max_tokens: usize,
    pub overlap_tokens: usize,
    pub concurrency: usize,
    pub timeout_secs: f64,
    pub retries: u32,
    pub workers: usize,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            index: None,
            scorer: ScorerKind::Lexical,
            endpoint: None,
            top_k: 3,
            pn_weight: 0.3,
            cutoff: 0.75,
            max_tokens: 128,
            overlap_tokens: 32,
            concurrency: 8,
            timeout_secs: 30.0,
            retries: 2,
            workers: 0,
            lexicon: None,
            embeddings: None,
        }
    }
}

impl Config {
    pub fn from_toml(s: &str) -> Result<Self, String> {
        toml::from_str(s).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let raw = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::from_toml(&raw).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.index, &mut cfg.lexicon, &mut cfg.embeddings].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Applies [`ENDPOINT_ENV`] if it is set and non-empty.
    pub fn apply_env(&mut self) {
        if let Ok(ep) = std::env::var(ENDPOINT_ENV) {
            if !ep.trim().is_empty() {
                self.endpoint = Some(ep.trim().to_string());
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.top_k == 0 {
            return Err("top_k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.pn_weight) {
            return Err(format!("pn_weight must be in [0, 1], got {}", self.pn_weight));
        }
        if !(-1.0..=1.0).contains(&self.cutoff) {
            return Err(format!("cutoff must be in [-1, 1], got {}", self.cutoff));
        }
        self.chunk_policy()?;
        if self.concurrency == 0 {
            return Err("concurrency must be at least 1".into());
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(format!("timeout_secs must be positive, got {}", self.timeout_secs));
        }
        if self.scorer == ScorerKind::Remote && self.endpoint.as_deref().is_none_or(|e| e.trim().is_empty()) {
            return Err(format!("scorer = \"remote\" needs an endpoint (config, --endpoint or {ENDPOINT_ENV})"));
        }
        if self.embeddings.is_some() && self.lexicon.is_none() {
            return Err("embeddings are only used for query rewriting, which needs a lexicon".into());
        }
        Ok(())
    }

    pub fn chunk_policy(&self) -> Result<ChunkPolicy, String> {
        if self.max_tokens == 0 {
            return Err("max_tokens must be at least 1".into());
        }
        ChunkPolicy::new(self.max_tokens, self.overlap_tokens).map_err(|e| e.to_string())
    }
}
