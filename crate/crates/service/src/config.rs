use std::net::SocketAddr;
use std::time::Duration;

use ethically_core::domain::SubmissionLimits;
use ethically_core::prompt::DEFAULT_TOKEN_BUDGET;
use ethically_core::{PromptConfig, PromptEngine, PromptError};
use ethically_gateway::anthropic::{
    AnthropicConfig, ApiKey, DEFAULT_BASE_URL, DEFAULT_MODEL_ID, ENV_API_KEY, ENV_BASE_URL,
    ENV_MODEL,
};
use ethically_gateway::RetryPolicy;
use thiserror::Error;

pub const ENV_BIND: &str = "ETHICALLY_BIND";
pub const ENV_CORS_ORIGINS: &str = "ETHICALLY_CORS_ORIGINS";

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_CORS_ORIGIN: &str = "http://localhost:5173";

/// Room for the JSON envelope and the short fields on top of the proposal.
pub const BODY_ENVELOPE_BYTES: usize = 16 * 1024;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{ENV_BIND} is not a socket address: {0}")]
    InvalidBind(String),
    #[error("token_budget must be greater than zero")]
    ZeroTokenBudget,
    #[error("retry policy needs at least one attempt")]
    ZeroAttempts,
    #[error("rate limit capacity must be greater than zero")]
    ZeroRateLimit,
}

/// Per-client flood control for POST /review.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLimit {
    pub burst: u32,
    pub refill_every: Duration,
}

impl Default for RateLimit {
    fn default() -> Self {
        Self {
            burst: 10,
            refill_every: Duration::from_secs(6),
        }
    }
}

/// Everything the service needs at startup. Has no Serialize impl, and the
/// key's Debug output is masked.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind_address: SocketAddr,
    pub api_key: Option<ApiKey>,
    pub model_id: String,
    pub base_url: String,
    pub token_budget: usize,
    pub retry: RetryPolicy,
    pub precheck_enabled: bool,
    pub cors_allowed_origins: Vec<String>,
    pub limits: SubmissionLimits,
    pub rate_limit: RateLimit,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind_address: DEFAULT_BIND.parse().unwrap(),
            api_key: None,
            model_id: DEFAULT_MODEL_ID.to_string(),
            base_url: DEFAULT_BASE_URL.to_string(),
            token_budget: DEFAULT_TOKEN_BUDGET,
            retry: RetryPolicy::default(),
            precheck_enabled: true,
            cors_allowed_origins: vec![DEFAULT_CORS_ORIGIN.to_string()],
            limits: SubmissionLimits::default(),
            rate_limit: RateLimit::default(),
        }
    }
}

fn non_empty(value: Option<String>) -> Option<String> {
    value
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|name| std::env::var(name).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        if let Some(bind) = non_empty(lookup(ENV_BIND)) {
            config.bind_address = bind.parse().map_err(|_| ConfigError::InvalidBind(bind))?;
        }
        config.api_key = non_empty(lookup(ENV_API_KEY)).map(ApiKey::new);
        if let Some(model) = non_empty(lookup(ENV_MODEL)) {
            config.model_id = model;
        }
        if let Some(url) = non_empty(lookup(ENV_BASE_URL)) {
            config.base_url = url.trim_end_matches('/').to_string();
        }
        if let Some(origins) = non_empty(lookup(ENV_CORS_ORIGINS)) {
            config.cors_allowed_origins = origins
                .split(',')
                .map(|o| o.trim().trim_end_matches('/').to_string())
                .filter(|o| !o.is_empty())
                .collect();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.token_budget == 0 {
            return Err(ConfigError::ZeroTokenBudget);
        }
        if self.retry.max_attempts == 0 {
            return Err(ConfigError::ZeroAttempts);
        }
        if self.rate_limit.burst == 0 {
            return Err(ConfigError::ZeroRateLimit);
        }
        Ok(())
    }

    /// Largest accepted request body in bytes.
    pub fn body_limit(&self) -> usize {
        self.limits.max_proposal_chars + BODY_ENVELOPE_BYTES
    }

    pub fn prompt_engine(&self) -> Result<PromptEngine, PromptError> {
        let prompt = PromptConfig {
            token_budget: self.token_budget,
            ..PromptConfig::default()
        };
        PromptEngine::new(prompt, self.limits)
    }

    /// Client settings for the live provider, when a key is configured.
    pub fn anthropic(&self) -> Option<AnthropicConfig> {
        let key = self.api_key.clone()?;
        Some(AnthropicConfig {
            api_key: key,
            model_id: self.model_id.clone(),
            base_url: self.base_url.clone(),
        })
    }
}
