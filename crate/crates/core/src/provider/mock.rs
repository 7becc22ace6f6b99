//! Test transports: scripted reply sequences and content-keyed rules.
//!
//! These power every offline test and the deterministic benchmark fixtures;
//! they are part of the public surface so integration tests and downstream
//! harnesses can drive the engine without network access.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use super::{ModelRequest, ModelResponse, TokenUsage, Transport, TransportError};

/// Deterministic usage accounting for mock replies: quarter of the byte
/// counts, so different prompts produce different but reproducible numbers.
fn synthetic_usage(request: &ModelRequest, reply: &str) -> TokenUsage {
    let input_bytes: usize = request
        .messages
        .iter()
        .map(|m| m.text_content().len())
        .sum();
    TokenUsage::new(
        (input_bytes as u64).div_ceil(4),
        (reply.len() as u64).div_ceil(4),
    )
}

pub fn reply(text: impl Into<String>) -> ModelResponse {
    ModelResponse {
        text: text.into(),
        usage: TokenUsage::default(),
        latency_seconds: 0.0,
    }
}

type Scripted = std::result::Result<ModelResponse, TransportError>;

/// Replies consumed in order; an exhausted script is a fatal error so tests
/// fail loudly when a flow makes more calls than expected.
pub struct ScriptedTransport {
    script: Mutex<VecDeque<Scripted>>,
    calls: AtomicU64,
}

impl ScriptedTransport {
    pub fn new(replies: Vec<Scripted>) -> Self {
        Self {
            script: Mutex::new(replies.into()),
            calls: AtomicU64::new(0),
        }
    }

    /// Script of plain text replies.
    pub fn texts(replies: &[&str]) -> Self {
        Self::new(replies.iter().map(|t| Ok(reply(*t))).collect())
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().expect("script lock").len()
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, request: &ModelRequest) -> std::result::Result<ModelResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let next = self.script.lock().expect("script lock").pop_front();
        match next {
            Some(Ok(mut response)) => {
                if response.usage == TokenUsage::default() {
                    response.usage = synthetic_usage(request, &response.text);
                }
                Ok(response)
            }
            Some(Err(err)) => Err(err),
            None => Err(TransportError::Fatal("mock script exhausted".into())),
        }
    }
}

/// Content-keyed transport: the reply is the first rule whose needle occurs
/// in the request's last message. Order-independent, so concurrent
/// benchmark runs stay deterministic.
pub struct RuleTransport {
    rules: Vec<(String, String)>,
    default: Option<String>,
    calls: AtomicU64,
}

impl RuleTransport {
    pub fn new(rules: Vec<(String, String)>) -> Self {
        Self {
            rules,
            default: None,
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_default(mut self, text: impl Into<String>) -> Self {
        self.default = Some(text.into());
        self
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Transport for RuleTransport {
    fn send(&self, request: &ModelRequest) -> std::result::Result<ModelResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let haystack = request
            .messages
            .last()
            .map(|m| m.text_content())
            .unwrap_or_default();
        let text = self
            .rules
            .iter()
            .find(|(needle, _)| haystack.contains(needle))
            .map(|(_, reply)| reply.clone())
            .or_else(|| self.default.clone())
            .ok_or_else(|| {
                TransportError::Fatal(format!(
                    "no mock rule matches request ending with: {}",
                    haystack.chars().take(120).collect::<String>()
                ))
            })?;
        let usage = synthetic_usage(request, &text);
        Ok(ModelResponse {
            text,
            usage,
            latency_seconds: 0.0,
        })
    }
}
