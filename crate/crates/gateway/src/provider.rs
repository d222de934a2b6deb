use std::fmt;
use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 4096;

/// One model call: system prompt, user message and call metadata.
#[derive(Clone, PartialEq, Eq)]
pub struct ProviderRequest {
    pub system_text: String,
    pub user_text: String,
    pub model_id: String,
    pub max_output_tokens: u32,
    pub request_id: Uuid,
    pub prompt_version: String,
}

impl ProviderRequest {
    pub fn new(
        system_text: impl Into<String>,
        user_text: impl Into<String>,
        model_id: impl Into<String>,
        prompt_version: impl Into<String>,
    ) -> Self {
        Self {
            system_text: system_text.into(),
            user_text: user_text.into(),
            model_id: model_id.into(),
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            request_id: Uuid::new_v4(),
            prompt_version: prompt_version.into(),
        }
    }
}

// Prompt text stays out of Debug output so requests can be logged safely.
impl fmt::Debug for ProviderRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProviderRequest")
            .field("model_id", &self.model_id)
            .field("max_output_tokens", &self.max_output_tokens)
            .field("request_id", &self.request_id)
            .field("prompt_version", &self.prompt_version)
            .finish_non_exhaustive()
    }
}

/// Raw completion text as returned by a provider.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub raw_text: String,
    pub model_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderErrorKind {
    Timeout,
    Overloaded,
    AuthFailure,
    BadRequest,
    TransportFailure,
}

impl ProviderErrorKind {
    pub fn is_retryable(self) -> bool {
        matches!(
            self,
            ProviderErrorKind::Timeout
                | ProviderErrorKind::Overloaded
                | ProviderErrorKind::TransportFailure
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProviderErrorKind::Timeout => "timeout",
            ProviderErrorKind::Overloaded => "overloaded",
            ProviderErrorKind::AuthFailure => "auth_failure",
            ProviderErrorKind::BadRequest => "bad_request",
            ProviderErrorKind::TransportFailure => "transport_failure",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [
            ProviderErrorKind::Timeout,
            ProviderErrorKind::Overloaded,
            ProviderErrorKind::AuthFailure,
            ProviderErrorKind::BadRequest,
            ProviderErrorKind::TransportFailure,
        ]
        .into_iter()
        .find(|k| k.as_str() == name)
    }
}

impl fmt::Display for ProviderErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{kind}: {detail}")]
pub struct ProviderError {
    pub kind: ProviderErrorKind,
    pub retryable: bool,
    pub detail: String,
}

impl ProviderError {
    pub fn new(kind: ProviderErrorKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            retryable: kind.is_retryable(),
            detail: detail.into(),
        }
    }

    pub fn timeout(detail: impl Into<String>) -> Self {
        Self::new(ProviderErrorKind::Timeout, detail)
    }

    pub fn transport(detail: impl Into<String>) -> Self {
        Self::new(ProviderErrorKind::TransportFailure, detail)
    }
}

#[async_trait]
pub trait Provider: Send + Sync {
    async fn complete(&self, request: &ProviderRequest) -> Result<Completion, ProviderError>;
}

#[async_trait]
impl<P: Provider + ?Sized> Provider for Arc<P> {
    async fn complete(&self, request: &ProviderRequest) -> Result<Completion, ProviderError> {
        (**self).complete(request).await
    }
}

/// Hands out the provider to use for a given evaluation case.
pub trait ProviderSource: Send + Sync {
    fn provider_for(&self, case_id: &str) -> Result<Arc<dyn Provider>, ProviderError>;
}

/// Uses the same provider for every case.
pub struct SharedProvider(pub Arc<dyn Provider>);

impl ProviderSource for SharedProvider {
    fn provider_for(&self, _case_id: &str) -> Result<Arc<dyn Provider>, ProviderError> {
        Ok(self.0.clone())
    }
}
