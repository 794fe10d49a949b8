//! Chat-completion access behind one trait.
//!
//! Three backends implement [`ChatBackend`]:
//!
//! - [`HttpBackend`]: OpenAI-compatible `POST /v1/chat/completions` with retry.
//! - [`ScriptedMock`]: canned responses, recording every request it sees.
//! - [`ReplayBackend`]: a JSON-lines record/replay cache keyed by
//!   [`request_digest`], optionally recording misses through a fallback.

mod http;
mod mock;
mod replay;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use http::{HttpBackend, RetryPolicy};
pub use mock::{MockCall, MockScript, ScriptedMock};
pub use replay::{ReplayBackend, ReplayRecord};

pub const DEFAULT_TEMPERATURE: f64 = 0.7;
pub const GENERATION_MAX_TOKENS: u32 = 16_384;
pub const FEEDBACK_MAX_TOKENS: u32 = 2_048;
pub const DEFAULT_MODEL: &str = "llama3.1:8b";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
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

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// Append-only message history whose first message is the system prompt.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    messages: Vec<Message>,
}

impl Conversation {
    pub fn new(system_prompt: impl Into<String>) -> Self {
        Self { messages: vec![Message::system(system_prompt)] }
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn roles(&self) -> Vec<Role> {
        self.messages.iter().map(|m| m.role).collect()
    }

    pub fn last(&self) -> Option<&Message> {
        self.messages.last()
    }

    /// Appends a message. A system message is only valid as the first one.
    pub fn push(&mut self, message: Message) -> Result<(), LlmError> {
        let ok = match message.role {
            Role::System => self.messages.is_empty(),
            _ => !self.messages.is_empty(),
        };
        if !ok {
            return Err(LlmError::InvalidConversation(format!(
                "{} message at position {}",
                message.role,
                self.messages.len()
            )));
        }
        self.messages.push(message);
        Ok(())
    }

    pub fn push_user(&mut self, content: impl Into<String>) {
        self.push(Message::user(content)).expect("system prompt present");
    }

    pub fn push_assistant(&mut self, content: impl Into<String>) {
        self.push(Message::assistant(content)).expect("system prompt present");
    }

    /// True when `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &Conversation) -> bool {
        other.messages.starts_with(&self.messages)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompletionParams {
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CompletionParams {
    pub fn generation() -> Self {
        Self {
            model_name: DEFAULT_MODEL.to_string(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: GENERATION_MAX_TOKENS,
            seed: None,
        }
    }

    pub fn feedback() -> Self {
        Self { max_tokens: FEEDBACK_MAX_TOKENS, ..Self::generation() }
    }
}

/// Hex SHA-256 over model name, temperature, max tokens and every message.
pub fn request_digest(conversation: &Conversation, params: &CompletionParams) -> String {
    #[derive(Serialize)]
    struct Keyed<'a> {
        model: &'a str,
        temperature: f64,
        max_tokens: u32,
        messages: &'a [Message],
    }
    let payload = serde_json::to_vec(&Keyed {
        model: &params.model_name,
        temperature: params.temperature,
        max_tokens: params.max_tokens,
        messages: conversation.messages(),
    })
    .expect("serializable");
    hex::encode(Sha256::digest(&payload))
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("conversation is empty")]
    EmptyConversation,
    #[error("invalid conversation: {0}")]
    InvalidConversation(String),
    #[error("network failure after {attempts} attempts (request {digest}): {message}")]
    Network { digest: String, attempts: u32, message: String },
    #[error("HTTP {status} after {attempts} attempts (request {digest}): {body}")]
    Status { digest: String, status: u16, attempts: u32, body: String },
    #[error("malformed response (request {digest}): {message}")]
    MalformedResponse { digest: String, message: String },
    #[error("mock script exhausted after {calls} calls (request {digest})")]
    ScriptExhausted { digest: String, calls: usize },
    #[error("replay cache miss for request {digest}")]
    CacheMiss { digest: String },
    #[error("environment variable {0} is not set")]
    MissingApiKey(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Anything able to answer a chat completion.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, conversation: &Conversation, params: &CompletionParams) -> Result<Message, LlmError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Box<T> {
    fn complete(&self, conversation: &Conversation, params: &CompletionParams) -> Result<Message, LlmError> {
        (**self).complete(conversation, params)
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<T> {
    fn complete(&self, conversation: &Conversation, params: &CompletionParams) -> Result<Message, LlmError> {
        (**self).complete(conversation, params)
    }
}

/// Checks the conversation and forwards it to `backend`.
pub fn complete(
    conversation: &Conversation,
    params: &CompletionParams,
    backend: &dyn ChatBackend,
) -> Result<Message, LlmError> {
    if conversation.is_empty() {
        return Err(LlmError::EmptyConversation);
    }
    backend.complete(conversation, params)
}

/// Serializable backend selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendKind {
    Http {
        endpoint: String,
        /// Name of the environment variable holding the bearer token.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        api_key_env: Option<String>,
        #[serde(default)]
        retry: RetryPolicy,
    },
    Mock {
        script: PathBuf,
    },
    Replay {
        cache: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fallback: Option<Box<BackendKind>>,
    },
}

impl BackendKind {
    pub fn build(&self) -> Result<Box<dyn ChatBackend>, LlmError> {
        Ok(match self {
            BackendKind::Http { endpoint, api_key_env, retry } => {
                let key = match api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| LlmError::MissingApiKey(var.clone()))?),
                    None => None,
                };
                Box::new(HttpBackend::new(endpoint.clone(), key, *retry))
            }
            BackendKind::Mock { script } => Box::new(ScriptedMock::from_file(script)?),
            BackendKind::Replay { cache, fallback } => {
                let fallback = fallback.as_ref().map(|f| f.build()).transpose()?;
                Box::new(ReplayBackend::open(cache, fallback)?)
            }
        })
    }
}
