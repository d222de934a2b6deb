//! HTTP client for the Anthropic Messages API.

use std::fmt;

use async_trait::async_trait;
use serde::Deserialize;
use serde_json::json;

use crate::provider::{Completion, Provider, ProviderError, ProviderErrorKind, ProviderRequest};

pub const DEFAULT_MODEL_ID: &str = "claude-sonnet-4-20250514";
pub const DEFAULT_BASE_URL: &str = "https://api.anthropic.com";
pub const API_VERSION: &str = "2023-06-01";

pub const ENV_API_KEY: &str = "ETHICALLY_API_KEY";
pub const ENV_MODEL: &str = "ETHICALLY_MODEL";
pub const ENV_BASE_URL: &str = "ETHICALLY_BASE_URL";

/// API key that never appears in Debug output.
#[derive(Clone, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnthropicConfig {
    pub api_key: ApiKey,
    pub model_id: String,
    pub base_url: String,
}

impl AnthropicConfig {
    pub fn new(api_key: ApiKey) -> Self {
        Self {
            api_key,
            model_id: DEFAULT_MODEL_ID.to_string(),
            base_url: DEFAULT_BASE_URL.to_string(),
        }
    }

    /// Reads the key, model and base URL from the environment. Returns `None`
    /// when no key is set.
    pub fn from_env() -> Option<Self> {
        Self::from_lookup(|name| std::env::var(name).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Option<Self> {
        let key = lookup(ENV_API_KEY).filter(|k| !k.trim().is_empty())?;
        let mut config = Self::new(ApiKey::new(key.trim()));
        if let Some(model) = lookup(ENV_MODEL).filter(|m| !m.trim().is_empty()) {
            config.model_id = model.trim().to_string();
        }
        if let Some(url) = lookup(ENV_BASE_URL).filter(|u| !u.trim().is_empty()) {
            config.base_url = url.trim().trim_end_matches('/').to_string();
        }
        Some(config)
    }
}

/// Maps an HTTP status from the Messages API to an error kind.
pub fn classify_status(status: u16) -> ProviderErrorKind {
    match status {
        429 | 503 | 529 => ProviderErrorKind::Overloaded,
        401 | 403 => ProviderErrorKind::AuthFailure,
        400 | 404 | 413 | 422 => ProviderErrorKind::BadRequest,
        408 => ProviderErrorKind::Timeout,
        _ => ProviderErrorKind::TransportFailure,
    }
}

#[derive(Deserialize)]
struct MessagesResponse {
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    content: Vec<ContentBlock>,
}

#[derive(Deserialize)]
struct ContentBlock {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    text: String,
}

#[derive(Deserialize)]
struct ErrorResponse {
    error: ErrorBody,
}

#[derive(Deserialize)]
struct ErrorBody {
    #[serde(rename = "type", default)]
    kind: String,
    #[serde(default)]
    message: String,
}

pub struct AnthropicProvider {
    config: AnthropicConfig,
    client: reqwest::Client,
}

impl AnthropicProvider {
    pub fn new(config: AnthropicConfig) -> Self {
        Self {
            config,
            client: reqwest::Client::new(),
        }
    }

    pub fn model_id(&self) -> &str {
        &self.config.model_id
    }
}

fn error_detail(status: u16, body: &str) -> String {
    match serde_json::from_str::<ErrorResponse>(body) {
        Ok(e) => format!("HTTP {status} {}: {}", e.error.kind, e.error.message),
        Err(_) => format!("HTTP {status}"),
    }
}

#[async_trait]
impl Provider for AnthropicProvider {
    async fn complete(&self, request: &ProviderRequest) -> Result<Completion, ProviderError> {
        let url = format!("{}/v1/messages", self.config.base_url);
        let body = json!({
            "model": request.model_id,
            "max_tokens": request.max_output_tokens,
            "system": request.system_text,
            "messages": [{"role": "user", "content": request.user_text}],
        });
        let response = self
            .client
            .post(&url)
            .header("x-api-key", self.config.api_key.expose())
            .header("anthropic-version", API_VERSION)
            .header("content-type", "application/json")
            .json(&body)
            .send()
            .await
            .map_err(|e| {
                if e.is_timeout() {
                    ProviderError::timeout("request timed out")
                } else {
                    ProviderError::transport(format!("request failed: {}", e.without_url()))
                }
            })?;

        let status = response.status().as_u16();
        let text = response
            .text()
            .await
            .map_err(|e| ProviderError::transport(format!("reading response failed: {e}")))?;
        if !(200..300).contains(&status) {
            return Err(ProviderError::new(
                classify_status(status),
                error_detail(status, &text),
            ));
        }

        let parsed: MessagesResponse = serde_json::from_str(&text)
            .map_err(|e| ProviderError::transport(format!("unexpected response body: {e}")))?;
        let raw_text: String = parsed
            .content
            .iter()
            .filter(|b| b.kind == "text")
            .map(|b| b.text.as_str())
            .collect::<Vec<_>>()
            .join("");
        Ok(Completion {
            raw_text,
            model_id: parsed.model.unwrap_or_else(|| request.model_id.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn status_mapping() {
        let cases = [
            (429, ProviderErrorKind::Overloaded),
            (503, ProviderErrorKind::Overloaded),
            (529, ProviderErrorKind::Overloaded),
            (401, ProviderErrorKind::AuthFailure),
            (403, ProviderErrorKind::AuthFailure),
            (400, ProviderErrorKind::BadRequest),
            (413, ProviderErrorKind::BadRequest),
            (500, ProviderErrorKind::TransportFailure),
            (502, ProviderErrorKind::TransportFailure),
        ];
        for (status, kind) in cases {
            assert_eq!(classify_status(status), kind, "{status}");
        }
    }

    #[test]
    fn config_from_lookup() {
        let env: HashMap<&str, &str> = [
            (ENV_API_KEY, " sk-test "),
            (ENV_BASE_URL, "http://127.0.0.1:9/"),
        ]
        .into();
        let cfg = AnthropicConfig::from_lookup(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(cfg.api_key.expose(), "sk-test");
        assert_eq!(cfg.model_id, DEFAULT_MODEL_ID);
        assert_eq!(cfg.base_url, "http://127.0.0.1:9");
        assert!(AnthropicConfig::from_lookup(|_| None).is_none());
    }

    #[test]
    fn key_is_not_debug_printed() {
        let cfg = AnthropicConfig::new(ApiKey::new("sk-very-secret"));
        assert!(!format!("{cfg:?}").contains("very-secret"));
    }

    #[test]
    fn error_bodies_are_summarized() {
        let body = r#"{"type":"error","error":{"type":"overloaded_error","message":"Overloaded"}}"#;
        assert_eq!(
            error_detail(529, body),
            "HTTP 529 overloaded_error: Overloaded"
        );
        assert_eq!(error_detail(500, "<html>"), "HTTP 500");
    }
}
