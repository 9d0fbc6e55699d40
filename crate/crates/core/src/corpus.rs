//! CORD-19 record parsing, token-window chunking and the chunk index.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{whitespace_tokens, CharMap};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("invalid chunk policy: overlap_tokens ({overlap}) must be below max_tokens ({max})")]
    InvalidPolicy { max: usize, overlap: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corpus at {0} contains no valid documents")]
    EmptyCorpus(PathBuf),
}

/// One scholarly article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub abstract_text: String,
    pub body: String,
}

impl Document {
    /// Title, abstract and body joined by single newlines.
    pub fn full_text(&self) -> String {
        let mut s = String::with_capacity(self.title.len() + self.abstract_text.len() + self.body.len() + 2);
        s.push_str(&self.title);
        s.push('\n');
        s.push_str(&self.abstract_text);
        s.push('\n');
        s.push_str(&self.body);
        s
    }
}

#[derive(Deserialize)]
struct RawRecord {
    paper_id: Option<String>,
    #[serde(default)]
    metadata: Option<RawMetadata>,
    #[serde(default, rename = "abstract")]
    abstract_paras: Option<Vec<RawParagraph>>,
    #[serde(default)]
    body_text: Option<Vec<RawParagraph>>,
}

#[derive(Deserialize)]
struct RawMetadata {
    #[serde(default)]
    title: Option<String>,
}

#[derive(Deserialize)]
struct RawParagraph {
    text: String,
}

fn join_paragraphs(paras: Option<Vec<RawParagraph>>) -> String {
    paras
        .unwrap_or_default()
        .into_iter()
        .map(|p| p.text)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses one `document_parses` JSON record.
pub fn parse_document(record: &str) -> Result<Document, CorpusError> {
    let raw: RawRecord =
        serde_json::from_str(record).map_err(|e| CorpusError::MalformedRecord(e.to_string()))?;
    let doc_id = match raw.paper_id {
        Some(id) if !id.trim().is_empty() => id,
        _ => return Err(CorpusError::MalformedRecord("missing paper_id".into())),
    };
    Ok(Document {
        doc_id,
        title: raw.metadata.and_then(|m| m.title).unwrap_or_default(),
        abstract_text: join_paragraphs(raw.abstract_paras),
        body: join_paragraphs(raw.body_text),
    })
}

/// A contiguous window of a document's full text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub chunk_index: usize,
    /// Char offset of `text` within the document's full text.
    pub start_char: usize,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkPolicy {
    max_tokens: usize,
    overlap_tokens: usize,
}

impl ChunkPolicy {
    pub fn new(max_tokens: usize, overlap_tokens: usize) -> Result<Self, CorpusError> {
        if max_tokens == 0 || overlap_tokens >= max_tokens {
            return Err(CorpusError::InvalidPolicy { max: max_tokens, overlap: overlap_tokens });
        }
        Ok(Self { max_tokens, overlap_tokens })
    }

    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn overlap_tokens(&self) -> usize {
        self.overlap_tokens
    }

    pub fn stride(&self) -> usize {
        self.max_tokens - self.overlap_tokens
    }

    /// Token ranges `[start, end)` of the windows over `n_tokens` tokens.
    pub fn windows(&self, n_tokens: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if n_tokens == 0 {
            return out;
        }
        let mut start = 0;
        loop {
            let end = (start + self.max_tokens).min(n_tokens);
            out.push((start, end));
            if end == n_tokens {
                return out;
            }
            start += self.stride();
        }
    }
}

impl Default for ChunkPolicy {
    fn default() -> Self {
        Self { max_tokens: 128, overlap_tokens: 32 }
    }
}

/// Splits a document into overlapping token windows. Chunk text is the exact
/// source substring from the first to the last token of the window.
pub fn chunk_document(doc: &Document, policy: &ChunkPolicy) -> Vec<Chunk> {
    let full = doc.full_text();
    let tokens = whitespace_tokens(&full);
    let chars = CharMap::new(&full);
    policy
        .windows(tokens.len())
        .into_iter()
        .enumerate()
        .map(|(chunk_index, (s, e))| {
            let (b0, b1) = (tokens[s].start, tokens[e - 1].end);
            Chunk {
                doc_id: doc.doc_id.clone(),
                chunk_index,
                start_char: chars.char_at(b0),
                text: full[b0..b1].to_string(),
            }
        })
        .collect()
}

/// Chunks of one document, ordered by `chunk_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocChunks {
    pub doc_id: String,
    pub chunks: Vec<Chunk>,
}

/// A record that was skipped while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkipReport {
    pub source: String,
    pub reason: String,
}

/// Chunked corpus in deterministic doc-id order.
#[derive(Debug, Clone, Default)]
pub struct CorpusIndex {
    docs: Vec<DocChunks>,
    documents: Vec<Document>,
    skipped: Vec<SkipReport>,
}

impl CorpusIndex {
    /// Builds an index from parsed documents; later duplicates of a doc id are
    /// skipped.
    pub fn from_documents(documents: Vec<Document>, policy: &ChunkPolicy) -> Self {
        let mut by_id: BTreeMap<String, Document> = BTreeMap::new();
        let mut skipped = Vec::new();
        for doc in documents {
            if by_id.contains_key(&doc.doc_id) {
                skipped.push(SkipReport { source: doc.doc_id.clone(), reason: "duplicate doc_id".into() });
            } else {
                by_id.insert(doc.doc_id.clone(), doc);
            }
        }
        let documents: Vec<Document> = by_id.into_values().collect();
        let docs = documents
            .par_iter()
            .map(|d| DocChunks { doc_id: d.doc_id.clone(), chunks: chunk_document(d, policy) })
            .collect();
        Self { docs, documents, skipped }
    }

    /// Groups loose chunks by doc id. Chunks are re-sorted by index.
    pub fn from_chunks(chunks: impl IntoIterator<Item = Chunk>) -> Self {
        let mut by_id: BTreeMap<String, Vec<Chunk>> = BTreeMap::new();
        for c in chunks {
            by_id.entry(c.doc_id.clone()).or_default().push(c);
        }
        let docs = by_id
            .into_iter()
            .map(|(doc_id, mut chunks)| {
                chunks.sort_by_key(|c| c.chunk_index);
                DocChunks { doc_id, chunks }
            })
            .collect();
        Self { docs, documents: Vec::new(), skipped: Vec::new() }
    }

    pub fn docs(&self) -> &[DocChunks] {
        &self.docs
    }

    /// Parsed documents; empty when the index was loaded from a chunk file.
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn skipped(&self) -> &[SkipReport] {
        &self.skipped
    }

    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.docs.iter().flat_map(|d| d.chunks.iter())
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn num_chunks(&self) -> usize {
        self.docs.iter().map(|d| d.chunks.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_chunks() == 0
    }

    /// Writes one JSON chunk record per line.
    pub fn write_index<W: Write>(&self, mut out: W) -> io::Result<()> {
        for chunk in self.chunks() {
            serde_json::to_writer(&mut out, chunk)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }

    pub fn write_index_file(&self, path: &Path) -> Result<(), CorpusError> {
        let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
        let file = File::create(path).map_err(io_err)?;
        self.write_index(io::BufWriter::new(file)).map_err(io_err)
    }
}

/// Loads a directory of CORD-19 JSON records (recursively) or a chunk index
/// file. Malformed records are skipped and reported.
pub fn load_corpus(path: &Path, policy: &ChunkPolicy) -> Result<CorpusIndex, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let meta = std::fs::metadata(path).map_err(io_err)?;
    let index = if meta.is_dir() { load_dir(path, policy)? } else { load_index_file(path)? };
    if index.is_empty() && index.documents.is_empty() {
        return Err(CorpusError::EmptyCorpus(path.to_path_buf()));
    }
    Ok(index)
}

fn load_dir(dir: &Path, policy: &ChunkPolicy) -> Result<CorpusIndex, CorpusError> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CorpusError::Io {
            path: dir.to_path_buf(),
            source: e.into_io_error().unwrap_or_else(|| io::Error::other("directory walk failed")),
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "json") {
            files.push(entry.into_path());
        }
    }
    let parsed: Vec<(PathBuf, Result<Document, String>)> = files
        .into_par_iter()
        .map(|p| {
            let res = std::fs::read_to_string(&p)
                .map_err(|e| e.to_string())
                .and_then(|s| parse_document(&s).map_err(|e| e.to_string()));
            (p, res)
        })
        .collect();

    let mut docs = Vec::new();
    let mut skipped = Vec::new();
    for (p, res) in parsed {
        match res {
            Ok(d) => docs.push(d),
            Err(reason) => skipped.push(SkipReport { source: p.display().to_string(), reason }),
        }
    }
    let mut index = CorpusIndex::from_documents(docs, policy);
    skipped.append(&mut index.skipped);
    index.skipped = skipped;
    Ok(index)
}

fn load_index_file(path: &Path) -> Result<CorpusIndex, CorpusError> {
    let io_err = |source| CorpusError::Io { path: path.to_path_buf(), source };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut chunks = Vec::new();
    let mut skipped = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Chunk>(&line) {
            Ok(c) if !c.doc_id.is_empty() => chunks.push(c),
            Ok(_) => skipped.push(SkipReport {
                source: format!("{}:{}", path.display(), lineno + 1),
                reason: "empty doc_id".into(),
            }),
            Err(e) => skipped.push(SkipReport {
                source: format!("{}:{}", path.display(), lineno + 1),
                reason: e.to_string(),
            }),
        }
    }
    let mut index = CorpusIndex::from_chunks(chunks);
    index.skipped = skipped;
    Ok(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::slice_chars;

    fn doc(body: &str) -> Document {
        Document { doc_id: "d".into(), title: String::new(), abstract_text: String::new(), body: body.into() }
    }

    #[test]
    fn empty_sections() {
        let d = parse_document(r#"{"paper_id":"p1","metadata":{"title":"T"},"abstract":[],"body_text":[]}"#).unwrap();
        assert_eq!(d, Document { doc_id: "p1".into(), title: "T".into(), abstract_text: "".into(), body: "".into() });
    }

    #[test]
    fn body_paragraphs_joined_with_space() {
        let d = parse_document(
            r#"{"paper_id":"p2","metadata":{"title":"T","authors":[]},"body_text":[{"text":"A.","section":"x"},{"text":"B."}],"extra":1}"#,
        )
        .unwrap();
        assert_eq!(d.body, "A. B.");
        assert_eq!(d.abstract_text, "");
        assert_eq!(d.full_text(), "T\n\nA. B.");
    }

    #[test]
    fn missing_paper_id_is_malformed() {
        assert!(matches!(parse_document(r#"{"metadata":{"title":"T"}}"#), Err(CorpusError::MalformedRecord(_))));
        assert!(matches!(parse_document("not json"), Err(CorpusError::MalformedRecord(_))));
        assert!(matches!(parse_document(r#"{"paper_id":""}"#), Err(CorpusError::MalformedRecord(_))));
    }

    #[test]
    fn ten_tokens_four_by_one() {
        let p = ChunkPolicy::new(4, 1).unwrap();
        assert_eq!(p.windows(10), vec![(0, 4), (3, 7), (6, 10)]);
        let d = Document {
            doc_id: "d".into(),
            title: "t0 t1".into(),
            abstract_text: "t2  t3".into(),
            body: "t4 t5 t6 t7 t8 t9".into(),
        };
        let chunks = chunk_document(&d, &p);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[0].text, "t0 t1\nt2  t3");
        assert_eq!(chunks[1].text, "t3\nt4 t5 t6");
        assert_eq!(chunks[2].text, "t6 t7 t8 t9");
        let full = d.full_text();
        for c in &chunks {
            assert_eq!(slice_chars(&full, c.start_char, c.start_char + c.text.chars().count()), Some(c.text.as_str()));
        }
    }

    #[test]
    fn short_doc_is_one_chunk() {
        let d = doc("just a few words");
        let chunks = chunk_document(&d, &ChunkPolicy::default());
        assert_eq!(chunks.len(), 1);
        // title and abstract are empty, so the two separators are leading whitespace
        assert_eq!(chunks[0].text, "just a few words");
        assert_eq!(chunks[0].start_char, 2);

        let d = Document { doc_id: "d".into(), title: "A".into(), abstract_text: "b".into(), body: "c".into() };
        assert_eq!(chunk_document(&d, &ChunkPolicy::default())[0].text, d.full_text());
    }

    #[test]
    fn empty_doc_has_no_chunks() {
        assert!(chunk_document(&doc(""), &ChunkPolicy::default()).is_empty());
    }

    #[test]
    fn invalid_policy() {
        assert!(ChunkPolicy::new(4, 4).is_err());
        assert!(ChunkPolicy::new(0, 0).is_err());
        assert!(ChunkPolicy::new(1, 0).is_ok());
    }

    fn write(dir: &Path, name: &str, body: &str) {
        std::fs::write(dir.join(name), body).unwrap();
    }

    fn rec(id: &str) -> String {
        format!(r#"{{"paper_id":"{id}","metadata":{{"title":"Title {id}"}},"body_text":[{{"text":"Body of {id}."}}]}}"#)
    }

    #[test]
    fn load_sorted_directory() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "1.json", &rec("zeta"));
        write(dir.path(), "2.json", &rec("alpha"));
        write(dir.path(), "3.json", &rec("mid"));
        let idx = load_corpus(dir.path(), &ChunkPolicy::default()).unwrap();
        let ids: Vec<_> = idx.docs().iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, ["alpha", "mid", "zeta"]);
        assert!(idx.skipped().is_empty());
    }

    #[test]
    fn load_skips_malformed() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.json", &rec("a"));
        write(dir.path(), "b.json", &rec("b"));
        write(dir.path(), "c.json", r#"{"metadata":{}}"#);
        write(dir.path(), "notes.txt", "ignored");
        let idx = load_corpus(dir.path(), &ChunkPolicy::default()).unwrap();
        assert_eq!(idx.num_docs(), 2);
        assert_eq!(idx.skipped().len(), 1);
        assert!(idx.skipped()[0].source.ends_with("c.json"));
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_corpus(dir.path(), &ChunkPolicy::default()), Err(CorpusError::EmptyCorpus(_))));
        assert!(matches!(
            load_corpus(&dir.path().join("missing"), &ChunkPolicy::default()),
            Err(CorpusError::Io { .. })
        ));
    }

    #[test]
    fn index_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.json", &rec("a"));
        write(dir.path(), "b.json", &rec("b"));
        let policy = ChunkPolicy::new(2, 1).unwrap();
        let idx = load_corpus(dir.path(), &policy).unwrap();
        let mut buf = Vec::new();
        idx.write_index(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.ends_with('\n'));
        assert!(text.starts_with(r#"{"doc_id":"a","chunk_index":0,"start_char":0,"text":"Title a"}"#));

        let path = dir.path().join("index.jsonl");
        std::fs::write(&path, format!("{text}garbage\n")).unwrap();
        let back = load_corpus(&path, &policy).unwrap();
        assert_eq!(back.docs(), idx.docs());
        assert_eq!(back.skipped().len(), 1);
    }
}
