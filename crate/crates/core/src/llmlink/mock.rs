use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{request_digest, ChatBackend, CompletionParams, Conversation, LlmError, Message};

/// On-disk script for [`ScriptedMock`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    pub responses: Vec<String>,
    /// Start over at the first response instead of failing when exhausted.
    #[serde(default)]
    pub cycle: bool,
}

/// One request observed by the mock.
#[derive(Debug, Clone)]
pub struct MockCall {
    pub conversation: Conversation,
    pub params: CompletionParams,
    pub digest: String,
}

type Responder = dyn Fn(usize, &Conversation, &CompletionParams) -> Option<String> + Send + Sync;

/// Deterministic backend answering from a queue or a closure.
pub struct ScriptedMock {
    responder: Box<Responder>,
    state: Mutex<Vec<MockCall>>,
}

impl ScriptedMock {
    /// Answers with `responses` in order, then fails.
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_script(MockScript {
            responses: responses.into_iter().map(Into::into).collect(),
            cycle: false,
        })
    }

    pub fn from_script(script: MockScript) -> Self {
        let MockScript { responses, cycle } = script;
        Self::from_fn(move |i, _, _| {
            if responses.is_empty() {
                None
            } else if cycle {
                Some(responses[i % responses.len()].clone())
            } else {
                responses.get(i).cloned()
            }
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref();
        let io = |message: String| LlmError::Io { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        let script: MockScript = serde_json::from_str(&text).map_err(|e| io(e.to_string()))?;
        Ok(Self::from_script(script))
    }

    /// Answers with whatever `f` returns for the zero-based call index and
    /// the request; `None` is treated as exhaustion.
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(usize, &Conversation, &CompletionParams) -> Option<String> + Send + Sync + 'static,
    {
        Self { responder: Box::new(f), state: Mutex::new(Vec::new()) }
    }

    /// Every request received so far, in arrival order.
    pub fn calls(&self) -> Vec<MockCall> {
        self.state.lock().expect("mock lock").clone()
    }
}

impl ChatBackend for ScriptedMock {
    fn complete(&self, conversation: &Conversation, params: &CompletionParams) -> Result<Message, LlmError> {
        let digest = request_digest(conversation, params);
        let mut calls = self.state.lock().expect("mock lock");
        let index = calls.len();
        let content = (self.responder)(index, conversation, params)
            .ok_or_else(|| LlmError::ScriptExhausted { digest: digest.clone(), calls: index })?;
        calls.push(MockCall { conversation: conversation.clone(), params: params.clone(), digest });
        Ok(Message::assistant(content))
    }
}
