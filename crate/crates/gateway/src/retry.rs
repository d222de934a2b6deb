use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use async_trait::async_trait;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::provider::{Provider, ProviderError, ProviderRequest};

pub const DEFAULT_ATTEMPT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay: Duration::from_secs(2),
            max_delay: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// Inclusive bounds of the jittered delay before retry number `retry`
    /// (1 for the first retry).
    pub fn delay_bounds(&self, retry: u32) -> (Duration, Duration) {
        let factor = 2u32.saturating_pow(retry.min(31));
        let upper = self.base_delay.saturating_mul(factor).min(self.max_delay);
        let lower = self.base_delay.min(upper);
        (lower, upper)
    }

    pub fn delay<R: Rng + ?Sized>(&self, retry: u32, rng: &mut R) -> Duration {
        let (lower, upper) = self.delay_bounds(retry);
        if lower == upper {
            return lower;
        }
        let nanos = rng.random_range(lower.as_nanos() as u64..=upper.as_nanos() as u64);
        Duration::from_nanos(nanos)
    }
}

#[async_trait]
pub trait Sleeper: Send + Sync {
    async fn sleep(&self, duration: Duration);
}

pub struct TokioSleeper;

#[async_trait]
impl Sleeper for TokioSleeper {
    async fn sleep(&self, duration: Duration) {
        tokio::time::sleep(duration).await;
    }
}

/// Records requested delays and returns immediately.
#[derive(Default)]
pub struct RecordingSleeper {
    delays: Mutex<Vec<Duration>>,
}

impl RecordingSleeper {
    pub fn delays(&self) -> Vec<Duration> {
        self.delays.lock().unwrap().clone()
    }
}

#[async_trait]
impl Sleeper for RecordingSleeper {
    async fn sleep(&self, duration: Duration) {
        self.delays.lock().unwrap().push(duration);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProviderResult {
    pub raw_text: String,
    pub model_id: String,
    pub latency_ms: u64,
    pub attempts: u32,
    pub prompt_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("provider call failed after {attempts} attempt(s): {error}")]
pub struct GatewayFailure {
    pub error: ProviderError,
    pub attempts: u32,
}

/// Runs provider calls with a per-attempt timeout and jittered exponential
/// backoff between retryable failures.
pub struct Gateway {
    provider: Arc<dyn Provider>,
    policy: RetryPolicy,
    attempt_timeout: Duration,
    sleeper: Arc<dyn Sleeper>,
    rng: Mutex<StdRng>,
}

impl Gateway {
    pub fn new(provider: Arc<dyn Provider>) -> Self {
        Self {
            provider,
            policy: RetryPolicy::default(),
            attempt_timeout: DEFAULT_ATTEMPT_TIMEOUT,
            sleeper: Arc::new(TokioSleeper),
            rng: Mutex::new(StdRng::from_os_rng()),
        }
    }

    pub fn with_policy(mut self, policy: RetryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_attempt_timeout(mut self, timeout: Duration) -> Self {
        self.attempt_timeout = timeout;
        self
    }

    pub fn with_sleeper(mut self, sleeper: Arc<dyn Sleeper>) -> Self {
        self.sleeper = sleeper;
        self
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self {
            rng: Mutex::new(StdRng::seed_from_u64(seed)),
            ..self
        }
    }

    pub fn policy(&self) -> &RetryPolicy {
        &self.policy
    }

    async fn attempt(&self, request: &ProviderRequest) -> Result<crate::Completion, ProviderError> {
        let completion =
            tokio::time::timeout(self.attempt_timeout, self.provider.complete(request))
                .await
                .map_err(|_| {
                    ProviderError::timeout(format!(
                        "no response within {}s",
                        self.attempt_timeout.as_secs_f64()
                    ))
                })??;
        if completion.raw_text.trim().is_empty() {
            return Err(ProviderError::transport(
                "provider returned an empty completion",
            ));
        }
        Ok(completion)
    }

    pub async fn call(&self, request: &ProviderRequest) -> Result<ProviderResult, GatewayFailure> {
        let started = Instant::now();
        let max_attempts = self.policy.max_attempts.max(1);
        let mut attempt = 1;
        loop {
            match self.attempt(request).await {
                Ok(completion) => {
                    return Ok(ProviderResult {
                        raw_text: completion.raw_text,
                        model_id: completion.model_id,
                        latency_ms: started.elapsed().as_millis() as u64,
                        attempts: attempt,
                        prompt_version: request.prompt_version.clone(),
                    })
                }
                Err(error) if error.retryable && attempt < max_attempts => {
                    let delay = {
                        let mut rng = self.rng.lock().unwrap();
                        self.policy.delay(attempt, &mut *rng)
                    };
                    tracing::warn!(
                        request_id = %request.request_id,
                        attempt,
                        kind = %error.kind,
                        delay_ms = delay.as_millis() as u64,
                        "provider call failed, retrying"
                    );
                    self.sleeper.sleep(delay).await;
                    attempt += 1;
                }
                Err(error) => {
                    tracing::warn!(
                        request_id = %request.request_id,
                        attempt,
                        kind = %error.kind,
                        "provider call failed"
                    );
                    return Err(GatewayFailure {
                        error,
                        attempts: attempt,
                    });
                }
            }
        }
    }
}
