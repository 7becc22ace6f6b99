//! Model-backend abstraction.
//!
//! Every model call in the engine — generation, refinement, judging,
//! switching, baselines — goes through [`Provider::complete`]. The provider
//! wraps a [`Transport`] (live HTTP or a scripted mock) with retry/backoff
//! and an optional content-addressed [`ReplayCache`]:
//!
//! - `record`: live calls are persisted under their request digest; a repeat
//!   of a cached request returns the stored bytes without a network call.
//! - `replay`: requests are answered from the cache only; a miss is an
//!   error, never a live call.
//! - `passthrough`: straight to the transport.
//!
//! Request digests cover the canonical serialization of model id, messages
//! (including image bytes), temperature, and output cap, so mixed-model runs
//! never cross-contaminate.

mod http;
pub mod mock;
mod replay;

pub use http::HttpTransport;
pub use replay::ReplayCache;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::instance::MediaKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

/// One message part: text or inline image bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Text(String),
    Image { bytes: Vec<u8>, kind: MediaKind },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub parts: Vec<Part>,
}

impl Message {
    pub fn text(role: Role, text: impl Into<String>) -> Self {
        Self {
            role,
            parts: vec![Part::Text(text.into())],
        }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self::text(Role::User, text)
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Self::text(Role::Assistant, text)
    }

    /// Concatenated text parts.
    pub fn text_content(&self) -> String {
        let mut out = String::new();
        for part in &self.parts {
            if let Part::Text(t) = part {
                out.push_str(t);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRequest {
    pub model_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_output_tokens: Option<u32>,
}

impl ModelRequest {
    pub fn new(model_id: impl Into<String>, messages: Vec<Message>) -> Self {
        Self {
            model_id: model_id.into(),
            messages,
            temperature: 0.0,
            max_output_tokens: None,
        }
    }

    /// Canonical JSON for digesting and cache files: sorted keys, compact,
    /// image bytes as base64.
    pub fn canonical_value(&self) -> serde_json::Value {
        use base64::Engine as _;
        let b64 = base64::engine::general_purpose::STANDARD;
        let messages: Vec<serde_json::Value> = self
            .messages
            .iter()
            .map(|m| {
                let parts: Vec<serde_json::Value> = m
                    .parts
                    .iter()
                    .map(|p| match p {
                        Part::Text(t) => serde_json::json!({"text": t}),
                        Part::Image { bytes, kind } => serde_json::json!({
                            "image": b64.encode(bytes),
                            "kind": kind.mime(),
                        }),
                    })
                    .collect();
                serde_json::json!({"role": m.role.as_str(), "parts": parts})
            })
            .collect();
        serde_json::json!({
            "max_output_tokens": self.max_output_tokens,
            "messages": messages,
            "model_id": self.model_id,
            "temperature": self.temperature,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl TokenUsage {
    pub fn new(input_tokens: u64, output_tokens: u64) -> Self {
        Self {
            input_tokens,
            output_tokens,
        }
    }

    pub fn add(&mut self, other: TokenUsage) {
        self.input_tokens += other.input_tokens;
        self.output_tokens += other.output_tokens;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    pub usage: TokenUsage,
    pub latency_seconds: f64,
}

/// Per-million-token pricing, supplied by the user's config.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct PriceSheet {
    pub usd_per_million_input: f64,
    pub usd_per_million_output: f64,
}

/// Linear token cost: `in·p_in/10^6 + out·p_out/10^6`.
pub fn estimate_cost(usage: TokenUsage, prices: &PriceSheet) -> f64 {
    usage.input_tokens as f64 * prices.usd_per_million_input / 1e6
        + usage.output_tokens as f64 * prices.usd_per_million_output / 1e6
}

/// Collision-resistant digest over the canonical request serialization;
/// stable across runs and platforms.
pub fn request_digest(request: &ModelRequest) -> String {
    let canonical = request.canonical_value().to_string();
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CacheMode {
    Record,
    Replay,
    #[default]
    Passthrough,
}

impl std::str::FromStr for CacheMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "record" => Ok(CacheMode::Record),
            "replay" => Ok(CacheMode::Replay),
            "passthrough" => Ok(CacheMode::Passthrough),
            other => Err(Error::Config(format!("unknown cache mode '{other}'"))),
        }
    }
}

/// How a transport attempt failed, and whether retrying can help.
#[derive(Debug, Clone)]
pub enum TransportError {
    RateLimited(String),
    Timeout(String),
    Auth(String),
    Fatal(String),
    Transient(String),
}

impl TransportError {
    pub fn retryable(&self) -> bool {
        matches!(
            self,
            TransportError::RateLimited(_)
                | TransportError::Timeout(_)
                | TransportError::Transient(_)
        )
    }
}

/// A model backend: one blocking call per request.
pub trait Transport: Send + Sync {
    fn send(&self, request: &ModelRequest) -> std::result::Result<ModelResponse, TransportError>;
}

/// Retry schedule for transient transport failures: exponential backoff
/// starting at `base`, multiplied by `factor`, up to `max_attempts` total
/// attempts.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub base: Duration,
    pub factor: f64,
    pub max_attempts: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            base: Duration::from_secs(1),
            factor: 2.0,
            max_attempts: 5,
        }
    }
}

impl RetryPolicy {
    /// Fast schedule for tests.
    pub fn immediate() -> Self {
        Self {
            base: Duration::from_millis(1),
            factor: 1.0,
            max_attempts: 5,
        }
    }

    fn delay(&self, attempt: u32) -> Duration {
        let factor = self.factor.powi(attempt as i32);
        self.base.mul_f64(factor)
    }
}

/// The engine-facing completion client.
pub struct Provider {
    transport: Option<Arc<dyn Transport>>,
    cache: Option<ReplayCache>,
    mode: CacheMode,
    retry: RetryPolicy,
    transport_calls: AtomicU64,
}

impl Provider {
    pub fn new(transport: Arc<dyn Transport>) -> Self {
        Self {
            transport: Some(transport),
            cache: None,
            mode: CacheMode::Passthrough,
            retry: RetryPolicy::default(),
            transport_calls: AtomicU64::new(0),
        }
    }

    /// Replay-only provider: every request must hit the cache.
    pub fn replay_only(cache: ReplayCache) -> Self {
        Self {
            transport: None,
            cache: Some(cache),
            mode: CacheMode::Replay,
            retry: RetryPolicy::default(),
            transport_calls: AtomicU64::new(0),
        }
    }

    pub fn with_cache(mut self, cache: ReplayCache, mode: CacheMode) -> Self {
        self.cache = Some(cache);
        self.mode = mode;
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// Number of transport (network-equivalent) calls made so far. The
    /// replay-mode invariant is `transport_calls() == 0`.
    pub fn transport_calls(&self) -> u64 {
        self.transport_calls.load(Ordering::Relaxed)
    }

    /// Complete a chat request, honoring cache mode and retry policy.
    pub fn complete(&self, request: &ModelRequest) -> Result<ModelResponse> {
        match self.mode {
            CacheMode::Replay => {
                let cache = self
                    .cache
                    .as_ref()
                    .ok_or_else(|| Error::Config("replay mode requires a cache".into()))?;
                let digest = request_digest(request);
                cache.load(&digest)?.ok_or(Error::ReplayMiss { digest })
            }
            CacheMode::Record => {
                let cache = self
                    .cache
                    .as_ref()
                    .ok_or_else(|| Error::Config("record mode requires a cache".into()))?;
                let digest = request_digest(request);
                if let Some(hit) = cache.load(&digest)? {
                    return Ok(hit);
                }
                let response = self.live(request)?;
                cache.store(&digest, request, &response)?;
                Ok(response)
            }
            CacheMode::Passthrough => self.live(request),
        }
    }

    fn live(&self, request: &ModelRequest) -> Result<ModelResponse> {
        let transport = self.transport.as_ref().ok_or_else(|| {
            Error::Config("no transport configured (replay-only provider)".into())
        })?;
        let mut attempt = 0u32;
        loop {
            self.transport_calls.fetch_add(1, Ordering::Relaxed);
            match transport.send(request) {
                Ok(response) => return Ok(response),
                Err(err) => {
                    attempt += 1;
                    if err.retryable() && attempt < self.retry.max_attempts {
                        std::thread::sleep(self.retry.delay(attempt - 1));
                        continue;
                    }
                    return Err(match err {
                        TransportError::RateLimited(m) => Error::RateLimited {
                            attempts: attempt,
                            message: m,
                        },
                        TransportError::Timeout(m) => Error::Timeout(m),
                        TransportError::Auth(m) => Error::AuthFailure(m),
                        TransportError::Fatal(m) | TransportError::Transient(m) => {
                            Error::Provider(m)
                        }
                    });
                }
            }
        }
    }
}


#[cfg(test)]
mod cache_tests {
    use super::mock::ScriptedTransport;
    use super::*;

    fn request(text: &str) -> ModelRequest {
        ModelRequest::new("test-model", vec![Message::user(text)])
    }

    #[test]
    fn record_mode_persists_and_repeats_identically() {
        let dir = tempfile::tempdir().expect("tempdir");
        let cache = ReplayCache::open(dir.path()).expect("cache");
        let transport = Arc::new(ScriptedTransport::texts(&["live answer"]));
        let provider = Provider::new(transport.clone()).with_cache(cache, CacheMode::Record);

        let first = provider.complete(&request("q")).expect("live call");
        let second = provider.complete(&request("q")).expect("cache hit");
        assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap(),
            "immediate repeat returns identical bytes"
        );
        assert_eq!(provider.transport_calls(), 1, "second call never goes live");
    }

    #[test]
    fn replay_mode_never_touches_the_transport() {
        let dir = tempfile::tempdir().expect("tempdir");
        let cache = ReplayCache::open(dir.path()).expect("cache");

        // Seed one entry through record mode.
        let recorder = Provider::new(Arc::new(ScriptedTransport::texts(&["cached"])))
            .with_cache(cache.clone(), CacheMode::Record);
        recorder.complete(&request("seen")).expect("seed");

        // Replay with a transport attached: cached requests answer from
        // disk, unseen requests miss — the transport is never consulted.
        let guard = Arc::new(ScriptedTransport::texts(&["must never be used"]));
        let provider = Provider::new(guard.clone()).with_cache(cache, CacheMode::Replay);
        let hit = provider.complete(&request("seen")).expect("hit");
        assert_eq!(hit.text, "cached");
        let miss = provider.complete(&request("never seen")).unwrap_err();
        assert!(matches!(miss, Error::ReplayMiss { .. }));
        assert_eq!(
            guard.calls(),
            0,
            "network guard: zero transport calls in replay"
        );
    }
}
