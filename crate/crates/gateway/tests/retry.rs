use std::sync::Arc;
use std::time::Duration;

use ethically_gateway::{
    Gateway, MockProvider, MockStep, ProviderErrorKind, ProviderRequest, RecordingSleeper,
    RetryPolicy,
};

fn request() -> ProviderRequest {
    ProviderRequest::new("system", "user", "mock-model", "test/1")
}

fn gateway(steps: Vec<MockStep>, seed: u64) -> (Gateway, Arc<MockProvider>, Arc<RecordingSleeper>) {
    let mock = Arc::new(MockProvider::new(steps));
    let sleeper = Arc::new(RecordingSleeper::default());
    let gw = Gateway::new(mock.clone())
        .with_sleeper(sleeper.clone())
        .with_seed(seed);
    (gw, mock, sleeper)
}

#[tokio::test]
async fn succeeds_after_transient_failures() {
    let (gw, mock, sleeper) = gateway(
        vec![
            MockStep::Fail(ProviderErrorKind::Overloaded),
            MockStep::Fail(ProviderErrorKind::TransportFailure),
            MockStep::Reply("report".into()),
        ],
        1,
    );
    let result = gw.call(&request()).await.unwrap();
    assert_eq!(result.attempts, 3);
    assert_eq!(result.raw_text, "report");
    assert_eq!(result.prompt_version, "test/1");
    assert_eq!(mock.calls(), 3);
    assert_eq!(sleeper.delays().len(), 2);
}

#[tokio::test]
async fn gives_up_after_max_attempts() {
    let (gw, mock, sleeper) = gateway(vec![MockStep::Fail(ProviderErrorKind::Overloaded)], 2);
    let failure = gw.call(&request()).await.unwrap_err();
    assert_eq!(failure.attempts, 3);
    assert_eq!(failure.error.kind, ProviderErrorKind::Overloaded);
    assert!(failure.error.retryable);
    assert_eq!(mock.calls(), 3);
    assert_eq!(sleeper.delays().len(), 2);
}

#[tokio::test]
async fn non_retryable_errors_fail_fast() {
    for kind in [
        ProviderErrorKind::AuthFailure,
        ProviderErrorKind::BadRequest,
    ] {
        let (gw, mock, sleeper) = gateway(vec![MockStep::Fail(kind)], 3);
        let failure = gw.call(&request()).await.unwrap_err();
        assert_eq!(failure.attempts, 1);
        assert_eq!(failure.error.kind, kind);
        assert_eq!(mock.calls(), 1);
        assert!(sleeper.delays().is_empty());
    }
}

#[tokio::test]
async fn empty_completion_is_a_transport_failure() {
    let (gw, _, _) = gateway(vec![MockStep::Reply("  \n".into())], 4);
    let failure = gw.call(&request()).await.unwrap_err();
    assert_eq!(failure.error.kind, ProviderErrorKind::TransportFailure);
    assert_eq!(failure.attempts, 3);
}

#[tokio::test(start_paused = true)]
async fn hanging_attempts_time_out() {
    let (gw, _, _) = gateway(vec![MockStep::Hang, MockStep::Reply("late".into())], 5);
    let gw = gw.with_attempt_timeout(Duration::from_secs(120));
    let result = gw.call(&request()).await.unwrap();
    assert_eq!(result.attempts, 2);

    let (gw, _, _) = gateway(vec![MockStep::Hang], 6);
    let failure = gw.call(&request()).await.unwrap_err();
    assert_eq!(failure.error.kind, ProviderErrorKind::Timeout);
    assert_eq!(failure.attempts, 3);
}

/// Every recorded delay before retry k lies in [base, min(max, base * 2^k)],
/// checked against bounds computed here rather than by the policy.
#[tokio::test]
async fn backoff_delays_respect_bounds_over_many_runs() {
    let policy = RetryPolicy::default();
    let mut seen_distinct = std::collections::HashSet::new();
    for seed in 0..100u64 {
        let (gw, _, sleeper) = gateway(vec![MockStep::Fail(ProviderErrorKind::Overloaded)], seed);
        let gw = gw.with_policy(policy);
        gw.call(&request()).await.unwrap_err();
        let delays = sleeper.delays();
        assert_eq!(delays.len(), 2);
        for (i, d) in delays.iter().enumerate() {
            let k = i as u32 + 1;
            let upper_ms = (2_000u64 << k).min(30_000);
            assert!(d.as_millis() as u64 >= 2_000, "{d:?}");
            assert!(
                d.as_nanos() <= u128::from(upper_ms) * 1_000_000,
                "{d:?} > {upper_ms}ms"
            );
            seen_distinct.insert(d.as_millis());
        }
    }
    assert!(seen_distinct.len() > 50, "delays are not jittered");
}

#[tokio::test]
async fn real_sleeper_waits() {
    let mock = Arc::new(MockProvider::new(vec![
        MockStep::Fail(ProviderErrorKind::Timeout),
        MockStep::Reply("ok".into()),
    ]));
    let gw = Gateway::new(mock).with_policy(RetryPolicy {
        max_attempts: 2,
        base_delay: Duration::from_millis(20),
        max_delay: Duration::from_millis(40),
    });
    let started = std::time::Instant::now();
    let result = gw.call(&request()).await.unwrap();
    assert!(started.elapsed() >= Duration::from_millis(20));
    assert!(result.latency_ms >= 20);
}

#[test]
fn later_retries_wait_longer_on_average() {
    use rand::{rngs::StdRng, SeedableRng};
    let policy = RetryPolicy::default();
    let mut rng = StdRng::seed_from_u64(11);
    let mean = |retry: u32, rng: &mut StdRng| {
        (0..100)
            .map(|_| policy.delay(retry, rng).as_secs_f64())
            .sum::<f64>()
            / 100.0
    };
    let first = mean(1, &mut rng);
    let second = mean(2, &mut rng);
    assert!(second >= first, "{second} < {first}");
}

#[tokio::test]
async fn single_attempt_policy_never_retries() {
    let (gw, mock, sleeper) = gateway(vec![MockStep::Fail(ProviderErrorKind::Overloaded)], 1);
    let gw = gw.with_policy(RetryPolicy {
        max_attempts: 1,
        ..RetryPolicy::default()
    });
    let failure = gw.call(&request()).await.unwrap_err();
    assert_eq!(failure.attempts, 1);
    assert_eq!(mock.calls(), 1);
    assert!(sleeper.delays().is_empty());
}
