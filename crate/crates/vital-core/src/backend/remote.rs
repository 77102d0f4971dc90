//! Remote chat-completion client with retry and exponential backoff.
//!
//! Wire shape: JSON POST with `model`, `messages[{role, content[{type:
//! "text"|"image", ...}]}]`, `max_tokens`, `temperature`; the reply text
//! is `choices[0].message.content`. Statuses in the retry policy are
//! retried with delay `base * multiplier^k`; anything else is a
//! protocol error. Transport-level failures are not retried.

use std::fmt;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::backend::{
    Backend, FinishReason, GenerationRequest, GenerationResult, RequestPayload, RetryPolicy,
};
use crate::error::{CoreError, Result};

/// Environment variable carrying the endpoint URL.
pub const ENV_REMOTE_URL: &str = "VITAL_REMOTE_URL";
/// Environment variable carrying the API credential (never logged).
pub const ENV_REMOTE_API_KEY: &str = "VITAL_REMOTE_API_KEY";

#[derive(Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
    pub policy: RetryPolicy,
}

impl RemoteConfig {
    pub fn new(endpoint: String, model: String) -> Self {
        Self {
            endpoint,
            api_key: None,
            model,
            timeout: Duration::from_secs(60),
            policy: RetryPolicy::default(),
        }
    }

    /// Fill endpoint/credential from the environment when unset.
    pub fn with_env_fallback(mut self) -> Result<Self> {
        if self.endpoint.is_empty() {
            self.endpoint = std::env::var(ENV_REMOTE_URL).map_err(|_| {
                CoreError::Config(format!(
                    "remote endpoint not configured and {ENV_REMOTE_URL} is unset"
                ))
            })?;
        }
        if self.api_key.is_none() {
            self.api_key = std::env::var(ENV_REMOTE_API_KEY).ok();
        }
        Ok(self)
    }
}

impl fmt::Debug for RemoteConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteConfig")
            .field("endpoint", &self.endpoint)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("model", &self.model)
            .field("timeout", &self.timeout)
            .field("policy", &self.policy)
            .finish()
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        config.policy.validate()?;
        if config.endpoint.is_empty() {
            return Err(CoreError::Config("remote endpoint URL is empty".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| CoreError::Config(format!("cannot build http client: {e}")))?;
        Ok(Self { config, client })
    }

    fn post_once(&self, body: &Value) -> Result<(u16, String)> {
        let mut req = self
            .client
            .post(&self.config.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .json(body)
            .send()
            .map_err(|e| CoreError::Transport(format!("request to {} failed: {e}", self.config.endpoint)))?;
        let status = resp.status().as_u16();
        let text = resp
            .text()
            .map_err(|e| CoreError::Transport(format!("reading response body failed: {e}")))?;
        Ok((status, text))
    }
}

impl Backend for RemoteBackend {
    fn generate(&self, req: &GenerationRequest) -> Result<GenerationResult> {
        let messages = match &req.payload {
            RequestPayload::Messages(m) => m,
            RequestPayload::Sequence(_) => {
                return Err(CoreError::Input(
                    "remote backend consumes chat messages, not raw embedding sequences".into(),
                ))
            }
        };
        let body = json!({
            "model": self.config.model,
            "messages": messages,
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
        });

        let start = Instant::now();
        let policy = &self.config.policy;
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            let (status, text) = self.post_once(&body)?;
            if (200..300).contains(&status) {
                let latency = start.elapsed().as_millis() as u64;
                return decode_completion(&text, latency);
            }
            if !policy.retryable_statuses.contains(&status) {
                return Err(CoreError::Protocol { status, message: snippet(&text) });
            }
            if attempts >= policy.max_attempts {
                return Err(CoreError::Exhausted {
                    attempts,
                    message: format!("last status {status}: {}", snippet(&text)),
                });
            }
            std::thread::sleep(policy.delay(attempts - 1));
        }
    }

    fn model_id(&self) -> String {
        format!("remote:{}", self.config.model)
    }
}

fn snippet(text: &str) -> String {
    let mut s: String = text.chars().take(200).collect();
    if text.len() > s.len() {
        s.push_str("...");
    }
    s
}

/// Pull the completion text out of a chat-completion response body.
fn decode_completion(body: &str, latency_ms: u64) -> Result<GenerationResult> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| CoreError::Decode(format!("response body is not JSON: {e}")))?;
    let message = value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| CoreError::Decode("response missing choices[0].message".into()))?;
    let content = message
        .get("content")
        .and_then(Value::as_str)
        .ok_or_else(|| CoreError::Decode("choices[0].message.content is not a string".into()))?;
    if content.is_empty() {
        return Err(CoreError::Decode("service returned an empty completion".into()));
    }
    let finish = match value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("finish_reason"))
        .and_then(Value::as_str)
    {
        Some("length") => FinishReason::Length,
        _ => FinishReason::Stop,
    };
    GenerationResult::new(content.to_string(), finish, latency_ms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_extracts_content() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"OBJECT: mug"},"finish_reason":"stop"}]}"#;
        let out = decode_completion(body, 5).unwrap();
        assert_eq!(out.text, "OBJECT: mug");
        assert_eq!(out.finish_reason, FinishReason::Stop);
    }

    #[test]
    fn decode_rejects_malformed_and_empty() {
        assert!(matches!(decode_completion("not json", 0), Err(CoreError::Decode(_))));
        assert!(matches!(decode_completion("{}", 0), Err(CoreError::Decode(_))));
        let empty = r#"{"choices":[{"message":{"content":""}}]}"#;
        assert!(matches!(decode_completion(empty, 0), Err(CoreError::Decode(_))));
    }

    #[test]
    fn debug_redacts_api_key() {
        let mut cfg = RemoteConfig::new("http://localhost:1".into(), "m".into());
        cfg.api_key = Some("secret-token".into());
        let dbg = format!("{cfg:?}");
        assert!(!dbg.contains("secret-token"));
        assert!(dbg.contains("<redacted>"));
    }
}
