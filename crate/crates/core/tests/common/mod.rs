#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use litqa_core::corpus::{Chunk, CorpusIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

type Handler = dyn Fn(&str, &serde_json::Value) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server answering each request through `handler`.
pub struct StubServer {
    pub url: String,
    hits: Arc<AtomicUsize>,
}

impl StubServer {
    pub fn start(handler: impl Fn(&str, &serde_json::Value) -> (u16, String) + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let handler: Arc<Handler> = Arc::new(handler);
        let h = hits.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let (handler, h) = (handler.clone(), h.clone());
                std::thread::spawn(move || {
                    h.fetch_add(1, Ordering::SeqCst);
                    let _ = serve_one(stream, handler.as_ref());
                });
            }
        });
        Self { url, hits }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

fn serve_one(stream: TcpStream, handler: &Handler) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let path = request_line.split_whitespace().nth(1).unwrap_or("/").to_string();
    let mut len = 0;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        if line == "\r\n" || line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body)?;
    let json = serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null);
    let (status, payload) = handler(&path, &json);
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    stream.flush()
}

/// An address nothing listens on.
pub fn dead_endpoint() -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = l.local_addr().unwrap();
    drop(l);
    format!("http://{addr}")
}

/// Lowercase letter-only word for vocabulary index `i` (no digits, so
/// queries built from these have no proper nouns).
pub fn vocab_word(i: usize) -> String {
    let mut n = i;
    let mut s = String::from("v");
    loop {
        s.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            return s;
        }
    }
}

pub fn word(rng: &mut ChaCha8Rng, vocab: usize) -> String {
    vocab_word(rng.random_range(0..vocab))
}

pub fn sentence(rng: &mut ChaCha8Rng, vocab: usize, len: usize) -> String {
    let words: Vec<String> = (0..len).map(|_| word(rng, vocab)).collect();
    let mut s = words.join(" ");
    s.replace_range(0..1, "W");
    s.push('.');
    s
}

/// `n_docs` documents of 1..=max_chunks chunks of random sentences.
pub fn synthetic_corpus(seed: u64, n_docs: usize, max_chunks: usize, vocab: usize) -> CorpusIndex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chunks = Vec::new();
    for d in 0..n_docs {
        let n = rng.random_range(1..=max_chunks);
        for i in 0..n {
            let sents: Vec<String> = (0..rng.random_range(1..4)).map(|_| {
                let len = rng.random_range(3..9);
                sentence(&mut rng, vocab, len)
            }).collect();
            chunks.push(Chunk { doc_id: format!("doc{d:03}"), chunk_index: i, start_char: 0, text: sents.join(" ") });
        }
    }
    CorpusIndex::from_chunks(chunks)
}

/// Closed-form window count for `t` tokens.
pub fn expected_chunk_count(t: usize, max: usize, overlap: usize) -> usize {
    if t == 0 {
        return 0;
    }
    let stride = max - overlap;
    t.saturating_sub(max).div_ceil(stride) + 1
}

/// Checks offset soundness, index order, token coverage and reconstruction
/// of a document's chunks against its full text.
pub fn check_chunks(doc: &litqa_core::Document, chunks: &[Chunk], overlap: usize) -> Result<(), String> {
    use litqa_core::text::slice_chars;
    let full = doc.full_text();
    let chars: Vec<char> = full.chars().collect();
    let mut covered = vec![false; chars.len()];
    let mut prev_start = None;
    for (i, c) in chunks.iter().enumerate() {
        let n = c.text.chars().count();
        if slice_chars(&full, c.start_char, c.start_char + n) != Some(c.text.as_str()) {
            return Err(format!("chunk {i} offsets do not reproduce its text"));
        }
        if c.chunk_index != i || prev_start.is_some_and(|p| p >= c.start_char) {
            return Err(format!("chunk {i} out of order"));
        }
        prev_start = Some(c.start_char);
        covered[c.start_char..c.start_char + n].iter_mut().for_each(|x| *x = true);
    }
    // every non-whitespace char (hence every token) is covered
    if let Some(p) = chars.iter().zip(&covered).position(|(ch, cov)| !ch.is_whitespace() && !cov) {
        return Err(format!("char {p} not covered"));
    }
    // stitch chunks by offsets, dropping overlaps
    let mut stitched = String::new();
    let mut end: usize = 0;
    for c in chunks {
        let n = c.text.chars().count();
        let skip = end.saturating_sub(c.start_char).min(n);
        if c.start_char > end && !stitched.is_empty() {
            if overlap > 0 {
                return Err("gap between overlapping windows".into());
            }
            stitched.extend(&chars[end..c.start_char]);
        }
        stitched.extend(c.text.chars().skip(skip));
        end = end.max(c.start_char + n);
    }
    if stitched != full.trim() {
        return Err("stitched chunks differ from the trimmed full text".into());
    }
    Ok(())
}

/// Test-side lexical oracle, written independently of the library scorers.
pub mod oracle {
    use std::collections::BTreeSet;

    use litqa_core::traindata::split_sentences;

    pub fn tokens(s: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut cur = String::new();
        for ch in s.chars().chain(std::iter::once(' ')) {
            if ch.is_alphanumeric() {
                cur.extend(ch.to_lowercase());
            } else if !cur.is_empty() {
                out.insert(std::mem::take(&mut cur));
            }
        }
        out
    }

    pub fn jaccard(a: &str, b: &str) -> f64 {
        let (x, y) = (tokens(a), tokens(b));
        if x.is_empty() && y.is_empty() {
            return 1.0;
        }
        let inter = x.intersection(&y).count();
        let union = x.union(&y).count();
        if union == 0 { 0.0 } else { inter as f64 / union as f64 }
    }

    /// (span text, span score): best sentence by shared query tokens.
    pub fn span(query: &str, ctx: &str) -> (String, f64) {
        let q = tokens(query);
        let mut best = (String::new(), 0usize);
        for s in split_sentences(ctx) {
            let shared = tokens(&s.text).intersection(&q).count();
            if shared > best.1 {
                best = (s.text, shared);
            }
        }
        let score = best.1 as f64 / q.len().max(1) as f64;
        (best.0, score)
    }

    /// Final chunk score for queries without proper nouns.
    pub fn chunk_score(query: &str, ctx: &str) -> f64 {
        let (text, _) = span(query, ctx);
        if text.is_empty() { 0.0 } else { jaccard(query, &text) }
    }
}
