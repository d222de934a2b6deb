//! In-memory token buckets keyed by client address.

use std::collections::HashMap;
use std::net::IpAddr;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::config::RateLimit;

/// Buckets beyond this count trigger pruning of idle (full) buckets.
const PRUNE_THRESHOLD: usize = 4096;

struct Bucket {
    tokens: f64,
    updated: Instant,
}

pub struct RateLimiter {
    burst: f64,
    per_token: Duration,
    buckets: Mutex<HashMap<IpAddr, Bucket>>,
}

impl RateLimiter {
    pub fn new(limit: RateLimit) -> Self {
        Self {
            burst: f64::from(limit.burst.max(1)),
            per_token: limit.refill_every,
            buckets: Mutex::new(HashMap::new()),
        }
    }

    fn refill(&self, bucket: &mut Bucket, now: Instant) {
        let elapsed = now.saturating_duration_since(bucket.updated);
        let gained = if self.per_token.is_zero() {
            self.burst
        } else {
            elapsed.as_secs_f64() / self.per_token.as_secs_f64()
        };
        bucket.tokens = (bucket.tokens + gained).min(self.burst);
        bucket.updated = now;
    }

    /// Takes one token for `client`. On refusal returns how long until the
    /// next token is available.
    pub fn check_at(&self, client: IpAddr, now: Instant) -> Result<(), Duration> {
        let mut buckets = self.buckets.lock().unwrap();
        if buckets.len() > PRUNE_THRESHOLD {
            buckets.retain(|_, b| {
                let idle = now.saturating_duration_since(b.updated);
                idle < self.per_token.mul_f64(self.burst)
            });
        }
        let bucket = buckets.entry(client).or_insert(Bucket {
            tokens: self.burst,
            updated: now,
        });
        self.refill(bucket, now);
        if bucket.tokens >= 1.0 {
            bucket.tokens -= 1.0;
            Ok(())
        } else {
            Err(self.per_token.mul_f64(1.0 - bucket.tokens))
        }
    }

    pub fn check(&self, client: IpAddr) -> Result<(), Duration> {
        self.check_at(client, Instant::now())
    }
}
