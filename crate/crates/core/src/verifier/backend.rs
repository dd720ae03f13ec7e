//! Completion backends: a replay table for offline runs and an HTTP client
//! for a live model service.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("cannot read replay file {path}: {source}")]
    ReplayIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid replay file: {0}")]
    ReplayFormat(String),
    #[error("request failed after {attempts} attempt(s): {message}")]
    Http { attempts: usize, message: String },
    #[error("malformed backend response: {0}")]
    Response(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub context: String,
    pub prompt: String,
    pub beam_size: usize,
    pub max_tokens: usize,
}

impl CompletionRequest {
    /// Replay lookup key.
    pub fn key(&self) -> String {
        replay_key(&self.context, &self.prompt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub texts: Vec<Completion>,
    pub backend: String,
}

/// Hex SHA-256 of `context`, a NUL byte, then `prompt`.
pub fn replay_key(context: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(context.as_bytes());
    h.update([0u8]);
    h.update(prompt.as_bytes());
    hex::encode(h.finalize())
}

pub trait CompletionBackend: Send + Sync {
    fn tag(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError>;
}

/// Best first, at most `beam_size` entries. The sort is stable, so equal
/// scores keep their recorded order.
fn normalize(mut texts: Vec<Completion>, beam_size: usize) -> Vec<Completion> {
    texts.sort_by(|a, b| b.score.total_cmp(&a.score));
    texts.truncate(beam_size);
    texts
}

/// Deterministic lookup in a recorded key -> completions table.
#[derive(Debug, Default)]
pub struct ReplayBackend {
    table: HashMap<String, Vec<Completion>>,
    misses: AtomicUsize,
}

impl ReplayBackend {
    pub fn from_json(bytes: &[u8]) -> Result<Self, BackendError> {
        let table: HashMap<String, Vec<Completion>> =
            serde_json::from_slice(bytes).map_err(|e| BackendError::ReplayFormat(e.to_string()))?;
        if let Some(bad) = table
            .keys()
            .find(|k| k.len() != 64 || !k.bytes().all(|b| b.is_ascii_hexdigit()))
        {
            return Err(BackendError::ReplayFormat(format!("key `{bad}` is not 64 hex digits")));
        }
        let table = table
            .into_iter()
            .map(|(k, v)| (k.to_ascii_lowercase(), v))
            .collect();
        Ok(ReplayBackend {
            table,
            misses: AtomicUsize::new(0),
        })
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let bytes = std::fs::read(path).map_err(|e| BackendError::ReplayIo {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_json(&bytes)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Lookups that found no entry.
    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

impl CompletionBackend for ReplayBackend {
    fn tag(&self) -> &str {
        "replay"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        let texts = match self.table.get(&request.key()) {
            Some(t) => normalize(t.clone(), request.beam_size),
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                Vec::new()
            }
        };
        Ok(CompletionResult {
            texts,
            backend: self.tag().to_string(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub url: String,
    pub token: Option<String>,
    pub timeout: Duration,
    /// Extra attempts after the first failure.
    pub retries: usize,
}

impl HttpConfig {
    pub fn new(url: impl Into<String>) -> Self {
        HttpConfig {
            url: url.into(),
            token: None,
            timeout: Duration::from_secs(30),
            retries: 2,
        }
    }
}

#[derive(Deserialize)]
struct WireResponse {
    completions: Vec<Completion>,
}

pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        HttpBackend { config, agent }
    }

    fn attempt(&self, body: &[u8]) -> Result<Vec<Completion>, (bool, String)> {
        let mut req = self
            .agent
            .post(self.config.url.as_str())
            .header("Content-Type", "application/json");
        if let Some(t) = &self.config.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = req.send(body).map_err(|e| (true, e.to_string()))?;
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| (true, e.to_string()))?;
        let parsed: WireResponse =
            serde_json::from_str(&text).map_err(|e| (false, format!("bad response body: {e}")))?;
        Ok(parsed.completions)
    }
}

impl CompletionBackend for HttpBackend {
    fn tag(&self) -> &str {
        "http"
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        let body = serde_json::to_vec(request).map_err(|e| BackendError::Response(e.to_string()))?;
        let mut last = String::new();
        for attempt in 0..=self.config.retries {
            match self.attempt(&body) {
                Ok(texts) => {
                    return Ok(CompletionResult {
                        texts: normalize(texts, request.beam_size),
                        backend: self.tag().to_string(),
                    })
                }
                Err((_, msg)) if attempt < self.config.retries => last = msg,
                Err((transport, msg)) => {
                    if !transport {
                        return Err(BackendError::Response(msg));
                    }
                    last = msg;
                }
            }
        }
        Err(BackendError::Http {
            attempts: self.config.retries + 1,
            message: last,
        })
    }
}

/// Records every request, then answers from the wrapped backend.
///
/// Used to dump the exact inputs a run would send, e.g. to build a replay
/// table.
pub struct RecordingBackend<B> {
    inner: B,
    log: Mutex<Vec<CompletionRequest>>,
}

impl<B: CompletionBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    /// Recorded requests, sorted by replay key for stable output.
    pub fn requests(&self) -> Vec<CompletionRequest> {
        let mut v = self.log.lock().map(|g| g.clone()).unwrap_or_default();
        v.sort_by_key(|r| r.key());
        v
    }
}

impl<B: CompletionBackend> CompletionBackend for RecordingBackend<B> {
    fn tag(&self) -> &str {
        self.inner.tag()
    }

    fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        if let Ok(mut g) = self.log.lock() {
            g.push(request.clone());
        }
        self.inner.complete(request)
    }
}
