//! Uniform language-model interface with three implementations: a tiny
//! deterministic decoder consuming assembled embedding sequences, a
//! scripted fixture backend, and a remote client speaking a
//! chat-completion-style wire protocol.

mod remote;
mod scripted;
mod toylm;

pub use remote::{RemoteBackend, RemoteConfig, ENV_REMOTE_API_KEY, ENV_REMOTE_URL};
pub use scripted::ScriptedBackend;
pub use toylm::{
    prompt_attention, prompt_logits, toy_generate, AttentionTrace, ToyLmBackend, ToyLmWeights,
};

use std::collections::BTreeSet;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::assembly::MultimodalSequence;
use crate::error::{CoreError, Result};

/// One part of a chat message: plain text or a base64 image attachment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MessagePart {
    Text { text: String },
    Image { data: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: Vec<MessagePart>,
}

impl ChatMessage {
    pub fn user(parts: Vec<MessagePart>) -> Self {
        Self { role: "user".to_string(), content: parts }
    }
}

/// Model input: either an assembled embedding sequence (ToyLM) or chat
/// messages (remote services). Exactly one is populated by
/// construction.
#[derive(Debug, Clone)]
pub enum RequestPayload {
    Sequence(MultimodalSequence),
    Messages(Vec<ChatMessage>),
}

#[derive(Debug, Clone)]
pub struct GenerationRequest {
    pub payload: RequestPayload,
    pub max_tokens: usize,
    pub temperature: f64,
    /// Object tag used by the scripted backend and for audit trails.
    pub object_id: Option<String>,
}

impl GenerationRequest {
    pub fn for_sequence(sequence: MultimodalSequence, max_tokens: usize, temperature: f64) -> Result<Self> {
        Self::validate(max_tokens, temperature)?;
        Ok(Self { payload: RequestPayload::Sequence(sequence), max_tokens, temperature, object_id: None })
    }

    pub fn for_messages(messages: Vec<ChatMessage>, max_tokens: usize, temperature: f64) -> Result<Self> {
        Self::validate(max_tokens, temperature)?;
        Ok(Self { payload: RequestPayload::Messages(messages), max_tokens, temperature, object_id: None })
    }

    pub fn with_object_id(mut self, id: impl Into<String>) -> Self {
        self.object_id = Some(id.into());
        self
    }

    fn validate(max_tokens: usize, temperature: f64) -> Result<()> {
        if max_tokens == 0 {
            return Err(CoreError::Config("max_tokens must be >= 1".into()));
        }
        if !(temperature >= 0.0) {
            return Err(CoreError::Config(format!("temperature must be >= 0, got {temperature}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinishReason {
    Length,
    Stop,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationResult {
    pub text: String,
    pub finish_reason: FinishReason,
    pub latency_ms: u64,
}

impl GenerationResult {
    pub fn new(text: String, finish_reason: FinishReason, latency_ms: u64) -> Result<Self> {
        if text.is_empty() && finish_reason != FinishReason::Error {
            return Err(CoreError::Decode(
                "empty generation text with a non-error finish reason".into(),
            ));
        }
        Ok(Self { text, finish_reason, latency_ms })
    }
}

/// Exponential backoff policy for the remote client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub multiplier: f64,
    pub retryable_statuses: BTreeSet<u16>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay_ms: 500,
            multiplier: 2.0,
            retryable_statuses: [429, 500, 502, 503].into_iter().collect(),
        }
    }
}

impl RetryPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_attempts == 0 {
            return Err(CoreError::Config("max_attempts must be >= 1".into()));
        }
        if !(self.multiplier > 1.0) {
            return Err(CoreError::Config(format!(
                "backoff multiplier must be > 1, got {}",
                self.multiplier
            )));
        }
        Ok(())
    }

    /// Delay before retry number `k` (0-based): `base * multiplier^k`.
    pub fn delay(&self, k: u32) -> Duration {
        let ms = self.base_delay_ms as f64 * self.multiplier.powi(k as i32);
        Duration::from_millis(ms.round() as u64)
    }
}

/// Common surface for all generation backends.
pub trait Backend: Send + Sync {
    fn generate(&self, req: &GenerationRequest) -> Result<GenerationResult>;
    fn model_id(&self) -> String;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retry_delays_nondecreasing() {
        let p = RetryPolicy { base_delay_ms: 100, multiplier: 2.0, ..Default::default() };
        let mut prev = Duration::ZERO;
        for k in 0..6 {
            let d = p.delay(k);
            assert!(d >= prev);
            prev = d;
        }
        assert_eq!(p.delay(0), Duration::from_millis(100));
        assert_eq!(p.delay(2), Duration::from_millis(400));
    }

    #[test]
    fn zero_max_tokens_rejected() {
        let err = GenerationRequest::for_messages(vec![], 0, 0.0).unwrap_err();
        assert!(matches!(err, CoreError::Config(_)));
    }

    #[test]
    fn empty_text_with_stop_rejected() {
        assert!(GenerationResult::new(String::new(), FinishReason::Stop, 1).is_err());
        assert!(GenerationResult::new(String::new(), FinishReason::Error, 1).is_ok());
    }
}
