use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ParaphraseScorer, ScoredSpan, ScoringError, SpanExtractor};

#[derive(Debug, Clone)]
pub struct RemoteOptions {
    /// Per-request timeout.
    pub timeout: Duration,
    /// Extra attempts after a transport failure.
    pub retries: u32,
    pub backoff: Duration,
    pub max_in_flight: usize,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        Self { timeout: Duration::from_secs(30), retries: 2, backoff: Duration::from_millis(100), max_in_flight: 8 }
    }
}

#[derive(Serialize)]
struct SpanRequest<'a> {
    query: &'a str,
    context: &'a str,
}

#[derive(Deserialize)]
struct SpanResponse {
    text: String,
    start: usize,
    end: usize,
    score: f64,
}

#[derive(Serialize)]
struct ParaphraseRequest<'a> {
    text_a: &'a str,
    text_b: &'a str,
}

#[derive(Deserialize)]
struct ParaphraseResponse {
    score: f64,
}

struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Self { free: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// Client for the inference sidecar (`POST /v1/span`, `POST /v1/paraphrase`).
/// Every response is validated before it is returned.
pub struct RemoteClient {
    base: String,
    agent: ureq::Agent,
    opts: RemoteOptions,
    gate: Gate,
}

impl std::fmt::Debug for RemoteClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteClient").field("base", &self.base).field("opts", &self.opts).finish()
    }
}

impl RemoteClient {
    pub fn new(endpoint: &str, opts: RemoteOptions) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(opts.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self { base: endpoint.trim_end_matches('/').to_string(), agent, gate: Gate::new(opts.max_in_flight), opts }
    }

    pub fn endpoint(&self) -> &str {
        &self.base
    }

    fn post<T: DeserializeOwned>(&self, path: &str, body: &impl Serialize) -> Result<T, ScoringError> {
        let _permit = self.gate.acquire();
        let url = format!("{}{}", self.base, path);
        let mut attempt = 0;
        loop {
            match self.agent.post(&url).send_json(body) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if (200..300).contains(&status) {
                        return resp
                            .body_mut()
                            .read_json::<T>()
                            .map_err(|e| ScoringError::Protocol(format!("{url}: undecodable response: {e}")));
                    }
                    let raw = resp.body_mut().read_to_string().unwrap_or_default();
                    return Err(ScoringError::Remote { status, message: server_message(&raw) });
                }
                Err(_) if attempt < self.opts.retries => {
                    std::thread::sleep(self.opts.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                Err(e) => {
                    return Err(ScoringError::Transport(format!("{url}: {e} (after {} attempts)", attempt + 1)));
                }
            }
        }
    }

    pub fn extract_span(&self, query: &str, context: &str) -> Result<ScoredSpan, ScoringError> {
        if context.is_empty() {
            return Ok(ScoredSpan::empty());
        }
        let r: SpanResponse = self.post("/v1/span", &SpanRequest { query, context })?;
        let span = ScoredSpan { text: r.text, start_char: r.start, end_char: r.end, score: r.score };
        span.validate(context)?;
        Ok(span)
    }

    pub fn paraphrase(&self, a: &str, b: &str) -> Result<f64, ScoringError> {
        let r: ParaphraseResponse = self.post("/v1/paraphrase", &ParaphraseRequest { text_a: a, text_b: b })?;
        if !(0.0..=1.0).contains(&r.score) {
            return Err(ScoringError::Protocol(format!("paraphrase score {} outside [0, 1]", r.score)));
        }
        Ok(r.score)
    }
}

/// Pulls `error`/`detail`/`message` out of a JSON error body, else the raw text.
fn server_message(raw: &str) -> String {
    serde_json::from_str::<serde_json::Value>(raw)
        .ok()
        .and_then(|v| {
            ["error", "detail", "message"]
                .iter()
                .find_map(|k| v.get(k).map(|m| m.as_str().map_or_else(|| m.to_string(), str::to_string)))
        })
        .unwrap_or_else(|| raw.trim().to_string())
}

impl SpanExtractor for RemoteClient {
    fn extract(&self, query: &str, context: &str) -> Result<ScoredSpan, ScoringError> {
        self.extract_span(query, context)
    }
}

impl ParaphraseScorer for RemoteClient {
    fn score(&self, a: &str, b: &str) -> Result<f64, ScoringError> {
        self.paraphrase(a, b)
    }
}
