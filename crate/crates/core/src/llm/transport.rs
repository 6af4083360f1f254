//! Chat-completion transports: an HTTP client and a scripted offline mock.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::parse::render_verdict;
use super::Conversation;

pub const DEFAULT_API_KEY_ENV: &str = "PDD_API_KEY";

#[derive(Debug, Clone, Error)]
#[error("{message}")]
pub struct TransportError {
    pub message: String,
    /// Timeouts, connection failures, 429 and 5xx responses.
    pub retryable: bool,
}

impl TransportError {
    pub fn fatal(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            retryable: false,
        }
    }

    pub fn retryable(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            retryable: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub temperature: f64,
    pub seed: Option<i64>,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub max_inflight: usize,
    /// First retry delay; doubles on each further attempt.
    pub backoff_ms: u64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            endpoint_url: String::new(),
            model_id: "gpt-4o".to_string(),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            temperature: 0.0,
            seed: None,
            timeout_ms: 60_000,
            max_retries: 3,
            max_inflight: 4,
            backoff_ms: 500,
        }
    }
}

impl TransportConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_inflight == 0 {
            return Err("max_inflight must be at least 1".into());
        }
        if self.timeout_ms == 0 {
            return Err("timeout must be positive".into());
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Delay before retry number `attempt` (0-based), capped at 30 s.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self.backoff_ms.saturating_mul(1u64 << attempt.min(16));
        Duration::from_millis(ms.min(30_000))
    }
}

/// What a transport needs for one exchange. `column` never goes on the wire;
/// it lets scripted transports pick a reply.
#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub column: &'a str,
    pub conversation: &'a Conversation,
}

pub trait ChatTransport: Send + Sync {
    /// Sends the conversation and returns the assistant's reply text.
    fn send(&self, request: &ChatRequest<'_>) -> Result<String, TransportError>;

    fn name(&self) -> &'static str;
}

/// JSON-over-HTTP chat completion client.
pub struct HttpTransport {
    agent: ureq::Agent,
    cfg: TransportConfig,
    api_key: Option<String>,
}

impl HttpTransport {
    /// Reads the bearer token from the configured environment variable, if set.
    pub fn new(cfg: TransportConfig) -> Self {
        let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Self { agent, cfg, api_key }
    }

    pub fn request_body(&self, conversation: &Conversation) -> serde_json::Value {
        request_body(&self.cfg, conversation)
    }
}

/// `{model, messages: [{role, content}...], temperature, seed?}`
pub fn request_body(cfg: &TransportConfig, conversation: &Conversation) -> serde_json::Value {
    let mut body = json!({
        "model": cfg.model_id,
        "messages": conversation.messages,
        "temperature": cfg.temperature,
    });
    if let Some(seed) = cfg.seed {
        body["seed"] = json!(seed);
    }
    body
}

/// Content of the first choice's message.
pub fn extract_reply(body: &serde_json::Value) -> Option<String> {
    body.pointer("/choices/0/message/content")?
        .as_str()
        .map(str::to_string)
}

impl ChatTransport for HttpTransport {
    fn send(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let body = self.request_body(request.conversation).to_string();
        let mut req = self
            .agent
            .post(&self.cfg.endpoint_url)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send(body.as_str())
            .map_err(|e| TransportError::retryable(format!("request failed: {e}")))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::retryable(format!("reading response: {e}")))?;
        match status {
            200..=299 => {}
            429 | 500..=599 => {
                return Err(TransportError::retryable(format!("HTTP {status}: {text}")))
            }
            _ => return Err(TransportError::fatal(format!("HTTP {status}: {text}"))),
        }
        let json: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| TransportError::fatal(format!("response is not JSON: {e}")))?;
        extract_reply(&json)
            .ok_or_else(|| TransportError::fatal("response has no choices[0].message.content"))
    }

    fn name(&self) -> &'static str {
        "http"
    }
}

/// One scripted reply: raw text, or a boolean rendered as the canonical answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedReply {
    Verdict(bool),
    Text(String),
}

/// Replies for one column; a list is consumed in order and its last entry repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptEntry {
    One(ScriptedReply),
    Sequence(Vec<ScriptedReply>),
}

/// Offline transport answering from a column -> reply script.
#[derive(Debug, Default)]
pub struct MockTransport {
    script: BTreeMap<String, ScriptEntry>,
    calls: Mutex<HashMap<String, usize>>,
}

impl MockTransport {
    pub fn new(script: BTreeMap<String, ScriptEntry>) -> Self {
        Self {
            script,
            calls: Mutex::new(HashMap::new()),
        }
    }

    /// Answers every listed column with its label.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = (&'a str, bool)>) -> Self {
        Self::new(
            labels
                .into_iter()
                .map(|(k, v)| (k.to_string(), ScriptEntry::One(ScriptedReply::Verdict(v))))
                .collect(),
        )
    }

    pub fn from_path(path: &Path) -> Result<Self, TransportError> {
        let text = fs::read_to_string(path)
            .map_err(|e| TransportError::fatal(format!("cannot read {}: {e}", path.display())))?;
        let script = serde_json::from_str(&text).map_err(|e| {
            TransportError::fatal(format!("malformed mock script {}: {e}", path.display()))
        })?;
        Ok(Self::new(script))
    }

    /// Number of requests received for `column`.
    pub fn calls(&self, column: &str) -> usize {
        self.calls.lock().unwrap().get(column).copied().unwrap_or(0)
    }
}

impl ChatTransport for MockTransport {
    fn send(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let entry = self.script.get(request.column).ok_or_else(|| {
            TransportError::fatal(format!("mock has no reply for column {:?}", request.column))
        })?;
        let n = {
            let mut calls = self.calls.lock().unwrap();
            let c = calls.entry(request.column.to_string()).or_insert(0);
            *c += 1;
            *c - 1
        };
        let reply = match entry {
            ScriptEntry::One(r) => r,
            ScriptEntry::Sequence(seq) => seq
                .get(n)
                .or(seq.last())
                .ok_or_else(|| TransportError::fatal("empty reply sequence"))?,
        };
        Ok(match reply {
            ScriptedReply::Verdict(b) => render_verdict(request.column, *b),
            ScriptedReply::Text(t) => t.clone(),
        })
    }

    fn name(&self) -> &'static str {
        "mock"
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
pub struct InflightLimit {
    free: Mutex<usize>,
    cv: Condvar,
}

pub struct Permit<'a>(&'a InflightLimit);

impl InflightLimit {
    pub fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}
