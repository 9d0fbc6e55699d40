//! Python bindings: documents and chunking, the keyword lexicon, sentence
//! splitting, the lexical scorers and a retrieval/QA engine.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use litqa_core::corpus::{self, ChunkPolicy, CorpusIndex};
use litqa_core::lexicon::{self, KeywordLexicon, StaticSimilarity};
use litqa_core::pipeline::{Pipeline, PipelineError, QueryRewriter, Scorers};
use litqa_core::scoring::{self, RemoteClient, RemoteOptions, ScoringError};
use litqa_core::traindata;
use pyo3::exceptions::{PyConnectionError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pipeline_err(e: PipelineError) -> PyErr {
    match e {
        PipelineError::AllChunksFailed(ScoringError::Protocol(m)) => PyValueError::new_err(format!("protocol error: {m}")),
        PipelineError::AllChunksFailed(err) => PyConnectionError::new_err(err.to_string()),
        other => value_err(other),
    }
}

fn corpus_err(e: corpus::CorpusError) -> PyErr {
    match e {
        corpus::CorpusError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => value_err(other),
    }
}

#[pyclass(module = "litqa", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct Document {
    doc_id: String,
    title: String,
    abstract_text: String,
    body: String,
}

#[pymethods]
impl Document {
    #[new]
    #[pyo3(signature = (doc_id, title = String::new(), abstract_text = String::new(), body = String::new()))]
    fn new(doc_id: String, title: String, abstract_text: String, body: String) -> Self {
        Self { doc_id, title, abstract_text, body }
    }

    /// Parse one article record (JSON text).
    #[staticmethod]
    fn from_json(record: &str) -> PyResult<Self> {
        corpus::parse_document(record).map(Self::from).map_err(corpus_err)
    }

    fn full_text(&self) -> String {
        self.core().full_text()
    }

    fn __repr__(&self) -> String {
        format!("Document(doc_id={:?}, title={:?})", self.doc_id, self.title)
    }
}

impl Document {
    fn core(&self) -> corpus::Document {
        corpus::Document {
            doc_id: self.doc_id.clone(),
            title: self.title.clone(),
            abstract_text: self.abstract_text.clone(),
            body: self.body.clone(),
        }
    }
}

impl From<corpus::Document> for Document {
    fn from(d: corpus::Document) -> Self {
        Self { doc_id: d.doc_id, title: d.title, abstract_text: d.abstract_text, body: d.body }
    }
}

#[pyclass(module = "litqa", get_all, frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Chunk {
    doc_id: String,
    chunk_index: usize,
    start_char: usize,
    text: String,
}

#[pymethods]
impl Chunk {
    #[new]
    #[pyo3(signature = (doc_id, chunk_index, text, start_char = 0))]
    fn new(doc_id: String, chunk_index: usize, text: String, start_char: usize) -> Self {
        Self { doc_id, chunk_index, start_char, text }
    }

    fn __repr__(&self) -> String {
        format!("Chunk(doc_id={:?}, chunk_index={}, start_char={})", self.doc_id, self.chunk_index, self.start_char)
    }
}

impl From<&corpus::Chunk> for Chunk {
    fn from(c: &corpus::Chunk) -> Self {
        Self { doc_id: c.doc_id.clone(), chunk_index: c.chunk_index, start_char: c.start_char, text: c.text.clone() }
    }
}

impl From<&Chunk> for corpus::Chunk {
    fn from(c: &Chunk) -> Self {
        Self { doc_id: c.doc_id.clone(), chunk_index: c.chunk_index, start_char: c.start_char, text: c.text.clone() }
    }
}

fn policy(max_tokens: usize, overlap_tokens: usize) -> PyResult<ChunkPolicy> {
    if max_tokens == 0 {
        return Err(PyValueError::new_err("max_tokens must be at least 1"));
    }
    ChunkPolicy::new(max_tokens, overlap_tokens).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (doc, max_tokens = 128, overlap_tokens = 32))]
fn chunk_document(doc: &Document, max_tokens: usize, overlap_tokens: usize) -> PyResult<Vec<Chunk>> {
    let p = policy(max_tokens, overlap_tokens)?;
    Ok(corpus::chunk_document(&doc.core(), &p).iter().map(Chunk::from).collect())
}

/// Chunks of a directory of article records or of a chunk index file.
#[pyfunction]
#[pyo3(signature = (path, max_tokens = 128, overlap_tokens = 32))]
fn load_chunks(path: PathBuf, max_tokens: usize, overlap_tokens: usize) -> PyResult<Vec<Chunk>> {
    let index = corpus::load_corpus(&path, &policy(max_tokens, overlap_tokens)?).map_err(corpus_err)?;
    Ok(index.chunks().map(Chunk::from).collect())
}

#[pyclass(module = "litqa", frozen)]
struct Lexicon {
    inner: Arc<KeywordLexicon>,
}

#[pymethods]
impl Lexicon {
    #[new]
    #[pyo3(signature = (keywords, mapping = BTreeMap::new()))]
    fn new(keywords: Vec<String>, mapping: BTreeMap<String, Vec<String>>) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(KeywordLexicon::new(&keywords, &mapping).map_err(value_err)?) })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(KeywordLexicon::from_json(s).map_err(value_err)?) })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(KeywordLexicon::load(&path).map_err(value_err)?) })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn keywords(&self) -> Vec<String> {
        self.inner.keywords().to_vec()
    }

    #[getter]
    fn synonym_map(&self) -> BTreeMap<String, String> {
        self.inner.synonym_map().clone()
    }

    fn extract_keywords(&self, query: &str) -> Vec<String> {
        lexicon::extract_keywords(query, &self.inner)
    }

    /// Rewrites unseen query words using a similarity table keyed by word
    /// pairs. Returns a dict with `rewritten_query`, `substitutions` and
    /// `matched_keywords`.
    #[pyo3(signature = (query, similarities, cutoff = lexicon::DEFAULT_CUTOFF))]
    fn rewrite<'py>(
        &self,
        py: Python<'py>,
        query: &str,
        similarities: HashMap<(String, String), f64>,
        cutoff: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = lexicon::rewrite_unseen_query(query, &self.inner, &table(similarities), cutoff);
        let d = PyDict::new(py);
        d.set_item("rewritten_query", r.rewritten_query)?;
        let subs: Vec<(String, String, f64)> =
            r.substitutions.into_iter().map(|s| (s.original, s.keyword, s.similarity)).collect();
        d.set_item("substitutions", subs)?;
        d.set_item("matched_keywords", r.matched_keywords)?;
        Ok(d)
    }
}

fn table(similarities: HashMap<(String, String), f64>) -> StaticSimilarity {
    let mut t = StaticSimilarity::new();
    for ((a, b), s) in similarities {
        t.insert(&a, &b, s);
    }
    t
}

#[pyfunction]
fn extract_proper_nouns(query: &str) -> Vec<String> {
    lexicon::extract_proper_nouns(query)
}

/// `(text, start_char, end_char)` per sentence.
#[pyfunction]
fn split_sentences(text: &str) -> Vec<(String, usize, usize)> {
    traindata::split_sentences(text).into_iter().map(|s| (s.text, s.start_char, s.end_char)).collect()
}

/// Lexical span extraction: `(text, start_char, end_char, score)`.
#[pyfunction]
fn extract_span(query: &str, context: &str) -> (String, usize, usize, f64) {
    let s = scoring::lexical_extract_span(query, context);
    (s.text, s.start_char, s.end_char, s.score)
}

#[pyfunction]
fn paraphrase_score(a: &str, b: &str) -> f64 {
    scoring::lexical_paraphrase_score(a, b)
}

/// Retrieval and QA over an in-memory chunk index.
#[pyclass(module = "litqa", frozen)]
struct Engine {
    corpus: CorpusIndex,
    pipeline: Pipeline,
}

#[pymethods]
impl Engine {
    /// `endpoint` switches both stages to the remote inference service.
    /// `lexicon` plus `similarities` enable query rewriting.
    #[new]
    #[pyo3(signature = (chunks, *, pn_weight = 0.3, workers = 1, endpoint = None, timeout_secs = 30.0,
                        lexicon = None, similarities = None, cutoff = lexicon::DEFAULT_CUTOFF))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        chunks: Vec<PyRef<'_, Chunk>>,
        pn_weight: f64,
        workers: usize,
        endpoint: Option<String>,
        timeout_secs: f64,
        lexicon: Option<PyRef<'_, Lexicon>>,
        similarities: Option<HashMap<(String, String), f64>>,
        cutoff: f64,
    ) -> PyResult<Self> {
        if !(0.0..=1.0).contains(&pn_weight) {
            return Err(PyValueError::new_err("pn_weight must be in [0, 1]"));
        }
        if !(timeout_secs.is_finite() && timeout_secs > 0.0) {
            return Err(PyValueError::new_err("timeout_secs must be positive"));
        }
        let scorers = match endpoint {
            None => Scorers::lexical(),
            Some(ep) => {
                let opts = RemoteOptions { timeout: Duration::from_secs_f64(timeout_secs), ..RemoteOptions::default() };
                let client = Arc::new(RemoteClient::new(&ep, opts));
                Scorers::new(client.clone(), client)
            }
        };
        let mut pipeline = Pipeline::new(scorers).with_pn_weight(pn_weight).with_workers(workers).map_err(value_err)?;
        match (lexicon, similarities) {
            (Some(lex), Some(sims)) => {
                let rw = QueryRewriter::new(lex.inner.clone(), Arc::new(table(sims))).with_cutoff(cutoff);
                pipeline = pipeline.with_rewriter(rw);
            }
            (None, None) => {}
            _ => return Err(PyValueError::new_err("query rewriting needs both lexicon and similarities")),
        }
        let corpus = CorpusIndex::from_chunks(chunks.iter().map(|c| corpus::Chunk::from(&**c)));
        Ok(Self { corpus, pipeline })
    }

    #[getter]
    fn num_docs(&self) -> usize {
        self.corpus.num_docs()
    }

    #[getter]
    fn num_chunks(&self) -> usize {
        self.corpus.num_chunks()
    }

    /// List of `{rank, doc_id, score, excerpt, chunk_index}` dicts.
    #[pyo3(signature = (query, k = 3))]
    fn retrieve<'py>(&self, py: Python<'py>, query: &str, k: usize) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let r = py.detach(|| self.pipeline.retrieve(query, &self.corpus, k)).map_err(pipeline_err)?;
        r.results
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let out = PyDict::new(py);
                out.set_item("rank", i + 1)?;
                out.set_item("doc_id", d.doc_id)?;
                out.set_item("score", d.doc_score)?;
                out.set_item("excerpt", d.best_span.text)?;
                out.set_item("chunk_index", d.best_chunk_index)?;
                Ok(out)
            })
            .collect()
    }

    /// `{doc_id, chunk_index, answer, score, start_char, end_char}`.
    fn answer<'py>(&self, py: Python<'py>, query: &str) -> PyResult<Bound<'py, PyDict>> {
        let a = py.detach(|| self.pipeline.answer(query, &self.corpus)).map_err(pipeline_err)?.result;
        let out = PyDict::new(py);
        out.set_item("doc_id", a.doc_id)?;
        out.set_item("chunk_index", a.chunk_index)?;
        out.set_item("answer", a.answer.text)?;
        out.set_item("score", a.answer.score)?;
        out.set_item("start_char", a.answer.start_char)?;
        out.set_item("end_char", a.answer.end_char)?;
        Ok(out)
    }
}

#[pymodule]
fn litqa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Document>()?;
    m.add_class::<Chunk>()?;
    m.add_class::<Lexicon>()?;
    m.add_class::<Engine>()?;
    m.add_function(wrap_pyfunction!(chunk_document, m)?)?;
    m.add_function(wrap_pyfunction!(load_chunks, m)?)?;
    m.add_function(wrap_pyfunction!(extract_proper_nouns, m)?)?;
    m.add_function(wrap_pyfunction!(split_sentences, m)?)?;
    m.add_function(wrap_pyfunction!(extract_span, m)?)?;
    m.add_function(wrap_pyfunction!(paraphrase_score, m)?)?;
    Ok(())
}
