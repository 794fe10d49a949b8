use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{request_digest, ChatBackend, CompletionParams, Conversation, LlmError, Message};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    pub timeout_secs: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 3, base_delay_ms: 500, max_delay_ms: 8_000, timeout_secs: 600 }
    }
}

impl RetryPolicy {
    fn delay(&self, retry: u32) -> Duration {
        let ms = self.base_delay_ms.saturating_mul(1u64 << retry.min(16));
        Duration::from_millis(ms.min(self.max_delay_ms))
    }
}

/// Client for OpenAI-compatible chat completion servers.
///
/// Retries on HTTP 429, 5xx and transport failures with exponential
/// backoff. Other statuses fail immediately.
pub struct HttpBackend {
    url: String,
    api_key: Option<String>,
    retry: RetryPolicy,
    agent: ureq::Agent,
}

enum Attempt {
    Done(Message),
    Retry(LlmError),
    Fail(LlmError),
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, retry: RetryPolicy) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(retry.timeout_secs)))
            .build()
            .into();
        Self { url: completions_url(&endpoint.into()), api_key, retry, agent }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    fn attempt(&self, body: &str, digest: &str, attempts: u32) -> Attempt {
        let mut request = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", format!("Bearer {key}"));
        }
        let response = match request.send(body.as_bytes()) {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retry(LlmError::Network {
                    digest: digest.to_string(),
                    attempts,
                    message: e.to_string(),
                })
            }
        };
        let status = response.status().as_u16();
        let text = match response.into_body().read_to_string() {
            Ok(t) => t,
            Err(e) => {
                return Attempt::Retry(LlmError::Network {
                    digest: digest.to_string(),
                    attempts,
                    message: e.to_string(),
                })
            }
        };
        if !(200..300).contains(&status) {
            let err = LlmError::Status { digest: digest.to_string(), status, attempts, body: text };
            return if status == 429 || status >= 500 { Attempt::Retry(err) } else { Attempt::Fail(err) };
        }
        match extract_content(&text) {
            Ok((content, finish_reason)) => {
                if finish_reason.as_deref() == Some("length") {
                    log::warn!("completion {digest} hit max_tokens; the last row may be truncated");
                }
                Attempt::Done(Message::assistant(content))
            }
            Err(message) => Attempt::Fail(LlmError::MalformedResponse { digest: digest.to_string(), message }),
        }
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, conversation: &Conversation, params: &CompletionParams) -> Result<Message, LlmError> {
        let digest = request_digest(conversation, params);
        let body = request_body(conversation, params).to_string();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body, &digest, attempts) {
                Attempt::Done(m) => return Ok(m),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) if attempts > self.retry.max_retries => return Err(e),
                Attempt::Retry(e) => {
                    log::debug!("retrying request {digest} after: {e}");
                    thread::sleep(self.retry.delay(attempts - 1));
                }
            }
        }
    }
}

pub(crate) fn completions_url(endpoint: &str) -> String {
    let base = endpoint.trim_end_matches('/');
    if base.ends_with("/chat/completions") {
        base.to_string()
    } else if base.ends_with("/v1") {
        format!("{base}/chat/completions")
    } else {
        format!("{base}/v1/chat/completions")
    }
}

pub(crate) fn request_body(conversation: &Conversation, params: &CompletionParams) -> Value {
    let mut body = json!({
        "model": params.model_name,
        "messages": conversation.messages(),
        "temperature": params.temperature,
        "max_tokens": params.max_tokens,
    });
    if let Some(seed) = params.seed {
        body["seed"] = json!(seed);
    }
    body
}

fn extract_content(text: &str) -> Result<(String, Option<String>), String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let choice = value
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| "missing choices[0]".to_string())?;
    let content = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| "missing choices[0].message.content".to_string())?;
    let finish = choice.get("finish_reason").and_then(Value::as_str).map(str::to_string);
    Ok((content.to_string(), finish))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_joining() {
        assert_eq!(completions_url("http://h:1"), "http://h:1/v1/chat/completions");
        assert_eq!(completions_url("http://h:1/"), "http://h:1/v1/chat/completions");
        assert_eq!(completions_url("http://h/v1"), "http://h/v1/chat/completions");
        assert_eq!(completions_url("http://h/v1/chat/completions"), "http://h/v1/chat/completions");
    }

    #[test]
    fn body_has_wire_fields() {
        let mut c = Conversation::new("s");
        c.push_user("u");
        let body = request_body(&c, &CompletionParams::generation());
        assert_eq!(body["model"], "llama3.1:8b");
        assert_eq!(body["messages"][1]["role"], "user");
        assert_eq!(body["messages"][1]["content"], "u");
        assert_eq!(body["temperature"], 0.7);
        assert_eq!(body["max_tokens"], 16384);
        assert!(body.get("seed").is_none());
    }

    #[test]
    fn content_extraction() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"hi"},"finish_reason":"stop"}]}"#;
        assert_eq!(extract_content(ok).unwrap(), ("hi".to_string(), Some("stop".to_string())));
        assert!(extract_content(r#"{"choices":[]}"#).is_err());
        assert!(extract_content("nope").is_err());
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy { base_delay_ms: 100, max_delay_ms: 350, ..Default::default() };
        assert_eq!(p.delay(0), Duration::from_millis(100));
        assert_eq!(p.delay(1), Duration::from_millis(200));
        assert_eq!(p.delay(2), Duration::from_millis(350));
    }
}
