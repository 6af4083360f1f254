//! Context-aware column classification with a chat model.
//!
//! Each column is asked about separately. The data prompt carries the dataset
//! title, description, every feature name and the column's most frequent
//! values; the reply must be a single `{'column': bool}` dictionary.

pub mod parse;
pub mod prompt;
pub mod transport;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{sample_top_k, Column, CorpusError, Dataset, DEFAULT_SAMPLE_SIZE};
use crate::verdict::{ColumnVerdict, Evidence};

pub use parse::{parse_verdict, render_verdict};
pub use prompt::{build_data_prompt, build_example_pair, build_initial_prompt};
pub use transport::{
    ChatRequest, ChatTransport, HttpTransport, MockTransport, TransportConfig, TransportError,
};

use transport::InflightLimit;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("column {0:?} is not part of the dataset")]
    ColumnNotInDataset(String),
    #[error("transport error: {0}")]
    Transport(#[from] TransportError),
    #[error("unparseable reply: {0:?}")]
    UnparseableReply(String),
    #[error("reply names column {got:?}, expected {expected:?}")]
    ColumnMismatch { got: String, expected: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub initial_prompt: String,
    pub example_prompt: String,
    pub example_answer: String,
    pub data_prompt: String,
}

impl PromptBundle {
    pub fn for_column(ds: &Dataset, col: &Column, sample_size: usize) -> Result<Self, LlmError> {
        let sample = sample_top_k(col, sample_size)?;
        let (example_prompt, example_answer) = build_example_pair();
        Ok(Self {
            initial_prompt: build_initial_prompt().to_string(),
            example_prompt: example_prompt.to_string(),
            example_answer: example_answer.to_string(),
            data_prompt: build_data_prompt(ds, col, &sample)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// Always four messages: system, user (example), assistant (answer), user (data).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conversation {
    pub messages: Vec<Message>,
}

impl Conversation {
    /// Human-readable dump, one `### role` header per message.
    pub fn transcript(&self) -> String {
        let parts: Vec<String> = self
            .messages
            .iter()
            .map(|m| format!("### {}\n{}\n", m.role, m.content))
            .collect();
        parts.join("\n")
    }
}

pub fn assemble_conversation(bundle: &PromptBundle) -> Conversation {
    let msg = |role, content: &str| Message {
        role,
        content: content.to_string(),
    };
    Conversation {
        messages: vec![
            msg(Role::System, &bundle.initial_prompt),
            msg(Role::User, &bundle.example_prompt),
            msg(Role::Assistant, &bundle.example_answer),
            msg(Role::User, &bundle.data_prompt),
        ],
    }
}

/// The conversation that would be sent for `col`.
pub fn conversation_for(ds: &Dataset, col: &Column, sample_size: usize) -> Result<Conversation, LlmError> {
    Ok(assemble_conversation(&PromptBundle::for_column(ds, col, sample_size)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlmVerdict {
    pub column_name: String,
    pub is_personal: bool,
    pub raw_reply: String,
}

/// Sends per-column conversations through a transport with retries and an
/// in-flight cap. Safe to share across worker threads.
pub struct LlmClassifier {
    transport: Box<dyn ChatTransport>,
    cfg: TransportConfig,
    sample_size: usize,
    limit: InflightLimit,
    requests: AtomicUsize,
}

impl LlmClassifier {
    pub fn new(transport: Box<dyn ChatTransport>, cfg: TransportConfig) -> Self {
        let limit = InflightLimit::new(cfg.max_inflight);
        Self {
            transport,
            cfg,
            sample_size: DEFAULT_SAMPLE_SIZE,
            limit,
            requests: AtomicUsize::new(0),
        }
    }

    pub fn with_sample_size(mut self, k: usize) -> Self {
        self.sample_size = k;
        self
    }

    pub fn config(&self) -> &TransportConfig {
        &self.cfg
    }

    pub fn transport_name(&self) -> &'static str {
        self.transport.name()
    }

    /// Requests sent so far, retries included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    fn send(&self, column: &str, conversation: &Conversation) -> Result<String, TransportError> {
        let _permit = self.limit.acquire();
        self.requests.fetch_add(1, Ordering::Relaxed);
        self.transport.send(&ChatRequest {
            column,
            conversation,
        })
    }

    /// Builds the prompts, sends them and parses the reply. Transport
    /// failures marked retryable back off exponentially; unparseable replies
    /// are re-asked immediately. Both share the `max_retries` budget.
    pub fn classify_column_llm(&self, ds: &Dataset, col: &Column) -> Result<LlmVerdict, LlmError> {
        let conversation = conversation_for(ds, col, self.sample_size)?;
        let mut attempt = 0;
        loop {
            let last = attempt >= self.cfg.max_retries;
            match self.send(&col.name, &conversation) {
                Ok(reply) => match parse_verdict(&reply, &col.name) {
                    Err(LlmError::UnparseableReply(r)) if !last => {
                        log::warn!("column {:?}: unparseable reply {r:?}, retrying", col.name);
                    }
                    other => return other,
                },
                Err(e) if e.retryable && !last => {
                    log::warn!("column {:?}: {e}, retrying", col.name);
                    std::thread::sleep(self.cfg.backoff(attempt));
                }
                Err(e) => return Err(e.into()),
            }
            attempt += 1;
        }
    }

    pub fn classify_column(&self, ds: &Dataset, col: &Column) -> Result<ColumnVerdict, LlmError> {
        let v = self.classify_column_llm(ds, col)?;
        Ok(ColumnVerdict {
            column: v.column_name,
            position: col.position,
            personal: v.is_personal,
            evidence: Evidence::Reply(v.raw_reply),
        })
    }
}
