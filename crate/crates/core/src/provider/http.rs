//! Live chat-completion transport over HTTP.
//!
//! Speaks the common chat-completions JSON shape: `POST
//! {base_url}/chat/completions` with `model`, `messages` (text and
//! data-URL image parts), `temperature`, and optional `max_tokens`.
//! Credentials come from the environment variable named in the config and
//! travel as a bearer token.

use std::time::{Duration, Instant};

use base64::Engine as _;

use super::{Message, ModelRequest, ModelResponse, Part, TokenUsage, Transport, TransportError};

pub struct HttpTransport {
    base_url: String,
    api_key: String,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        let timeout = Duration::from_secs(300);
        Self {
            base_url: base_url.into(),
            api_key: api_key.into(),
            timeout,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self.agent = ureq::AgentBuilder::new().timeout(timeout).build();
        self
    }

    fn wire_message(message: &Message) -> serde_json::Value {
        let b64 = base64::engine::general_purpose::STANDARD;
        if message.parts.len() == 1 {
            if let Part::Text(text) = &message.parts[0] {
                return serde_json::json!({
                    "role": message.role.as_str(),
                    "content": text,
                });
            }
        }
        let content: Vec<serde_json::Value> = message
            .parts
            .iter()
            .map(|part| match part {
                Part::Text(text) => serde_json::json!({"type": "text", "text": text}),
                Part::Image { bytes, kind } => serde_json::json!({
                    "type": "image_url",
                    "image_url": {
                        "url": format!("data:{};base64,{}", kind.mime(), b64.encode(bytes)),
                    },
                }),
            })
            .collect();
        serde_json::json!({"role": message.role.as_str(), "content": content})
    }
}

impl Transport for HttpTransport {
    fn send(&self, request: &ModelRequest) -> Result<ModelResponse, TransportError> {
        let mut body = serde_json::json!({
            "model": request.model_id,
            "messages": request.messages.iter().map(Self::wire_message).collect::<Vec<_>>(),
            "temperature": request.temperature,
        });
        if let Some(cap) = request.max_output_tokens {
            body["max_tokens"] = serde_json::json!(cap);
        }

        let url = format!("{}/chat/completions", self.base_url.trim_end_matches('/'));
        let started = Instant::now();
        let result = self
            .agent
            .post(&url)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .set("Content-Type", "application/json")
            .send_string(&body.to_string());
        let latency_seconds = started.elapsed().as_secs_f64();

        let response = match result {
            Ok(response) => response,
            Err(ureq::Error::Status(status, response)) => {
                let text = response.into_string().unwrap_or_default();
                let message = format!(
                    "HTTP {status}: {}",
                    text.chars().take(500).collect::<String>()
                );
                return Err(match status {
                    401 | 403 => TransportError::Auth(message),
                    429 => TransportError::RateLimited(message),
                    408 => TransportError::Timeout(message),
                    500..=599 => TransportError::Transient(message),
                    _ => TransportError::Fatal(message),
                });
            }
            Err(ureq::Error::Transport(t)) => {
                let message = t.to_string();
                return Err(
                    if message.contains("timed out") || message.contains("timeout") {
                        TransportError::Timeout(message)
                    } else {
                        TransportError::Transient(message)
                    },
                );
            }
        };

        let payload: serde_json::Value = response
            .into_json()
            .map_err(|e| TransportError::Fatal(format!("bad response JSON: {e}")))?;
        let text = payload["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .or_else(|| {
                // Some backends return content as an array of text parts.
                payload["choices"][0]["message"]["content"]
                    .as_array()
                    .map(|parts| {
                        parts
                            .iter()
                            .filter_map(|p| p["text"].as_str())
                            .collect::<Vec<_>>()
                            .join("")
                    })
            })
            .ok_or_else(|| TransportError::Fatal("response missing message content".into()))?;
        let usage = TokenUsage::new(
            payload["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
            payload["usage"]["completion_tokens"].as_u64().unwrap_or(0),
        );
        Ok(ModelResponse {
            text,
            usage,
            latency_seconds,
        })
    }
}
