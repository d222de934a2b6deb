//! The HTTP JSON API: POST /review and GET /health.

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::rejection::JsonRejection;
use axum::extract::{ConnectInfo, DefaultBodyLimit, Request, State};
use axum::http::header::{CONTENT_TYPE, ORIGIN, RETRY_AFTER};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ethically_core::domain::ValidationFailure;
use ethically_core::guardrails::GuardrailDenial;
use ethically_core::report::ResponseKind;
use ethically_core::{PromptEngine, PromptError, ProposalSubmission};
use ethically_gateway::{Gateway, GatewayFailure, Provider, RetryPolicy, Sleeper};
use ethically_pipeline::{ReviewError, ReviewPipeline};
use serde::Serialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::ServiceConfig;
use crate::rate_limit::RateLimiter;

pub const BUSY_MESSAGE: &str =
    "The model provider may be busy at the moment. Please try again in a few minutes.";
pub const UNAVAILABLE_MESSAGE: &str =
    "The review could not be completed because the model provider rejected the request.";

struct AppState {
    engine: PromptEngine,
    provider: Arc<dyn Provider>,
    model_id: String,
    policy: RetryPolicy,
    precheck_enabled: bool,
    sleeper: Option<Arc<dyn Sleeper>>,
    attempt_timeout: Option<Duration>,
    limiter: RateLimiter,
    allowed_origins: Vec<HeaderValue>,
}

/// Builder for the service router.
pub struct App {
    state: AppState,
    body_limit: usize,
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    prompt_version: String,
    model_id: String,
}

impl App {
    pub fn new(config: &ServiceConfig, provider: Arc<dyn Provider>) -> Result<Self, PromptError> {
        let allowed_origins = config
            .cors_allowed_origins
            .iter()
            .filter_map(|o| HeaderValue::from_str(o).ok())
            .collect();
        Ok(Self {
            state: AppState {
                engine: config.prompt_engine()?,
                provider,
                model_id: config.model_id.clone(),
                policy: config.retry,
                precheck_enabled: config.precheck_enabled,
                sleeper: None,
                attempt_timeout: None,
                limiter: RateLimiter::new(config.rate_limit),
                allowed_origins,
            },
            body_limit: config.body_limit(),
        })
    }

    pub fn with_sleeper(mut self, sleeper: Arc<dyn Sleeper>) -> Self {
        self.state.sleeper = Some(sleeper);
        self
    }

    pub fn with_attempt_timeout(mut self, timeout: Duration) -> Self {
        self.state.attempt_timeout = Some(timeout);
        self
    }

    pub fn router(self) -> Router {
        let cors = CorsLayer::new()
            .allow_origin(AllowOrigin::list(self.state.allowed_origins.clone()))
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([CONTENT_TYPE]);
        let state = Arc::new(self.state);
        let review_route = post(review)
            .route_layer(middleware::from_fn_with_state(state.clone(), rate_limit))
            .route_layer(middleware::from_fn_with_state(state.clone(), check_origin));
        Router::new()
            .route("/review", review_route)
            .route("/health", get(health))
            .layer(DefaultBodyLimit::max(self.body_limit))
            .layer(cors)
            .with_state(state)
    }
}

fn error_body(status: StatusCode, error: &str, message: &str, extra: Value) -> Response {
    let mut body = json!({ "error": error, "message": message });
    if let (Value::Object(body), Value::Object(extra)) = (&mut body, extra) {
        body.extend(extra);
    }
    (status, Json(body)).into_response()
}

async fn check_origin(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if let Some(origin) = req.headers().get(ORIGIN) {
        if !state.allowed_origins.contains(origin) {
            return error_body(
                StatusCode::FORBIDDEN,
                "origin_not_allowed",
                "this origin may not call the review endpoint",
                json!({ "retryable": false }),
            );
        }
    }
    next.run(req).await
}

fn client_ip(req: &Request) -> IpAddr {
    req.extensions()
        .get::<ConnectInfo<SocketAddr>>()
        .map(|ConnectInfo(addr)| addr.ip())
        .unwrap_or(IpAddr::V4(Ipv4Addr::UNSPECIFIED))
}

async fn rate_limit(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    match state.limiter.check(client_ip(&req)) {
        Ok(()) => next.run(req).await,
        Err(wait) => {
            let secs = wait.as_secs_f64().ceil().max(1.0) as u64;
            let mut response = error_body(
                StatusCode::TOO_MANY_REQUESTS,
                "rate_limited",
                "too many review requests from this address",
                json!({ "retryable": true, "retry_after_secs": secs }),
            );
            response
                .headers_mut()
                .insert(RETRY_AFTER, HeaderValue::from(secs));
            response
        }
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health {
        status: "ok",
        prompt_version: state.engine.prompt_version().to_string(),
        model_id: state.model_id.clone(),
    })
}

fn validation_reason(failure: &ValidationFailure) -> &'static str {
    match failure {
        ValidationFailure::EmptyField(_) => "EmptyField",
        ValidationFailure::ProposalTooLong { .. } => "ProposalTooLong",
    }
}

fn denial_reason(denial: &GuardrailDenial) -> &'static str {
    match denial {
        GuardrailDenial::PiiNotConfirmed => "PiiNotConfirmed",
        GuardrailDenial::EmptySubmission => "EmptySubmission",
    }
}

fn provider_failure(failure: &GatewayFailure) -> Response {
    let retryable = failure.error.retryable;
    error_body(
        StatusCode::BAD_GATEWAY,
        "provider_unavailable",
        if retryable {
            BUSY_MESSAGE
        } else {
            UNAVAILABLE_MESSAGE
        },
        json!({
            "reasons": [failure.error.kind.as_str()],
            "retryable": retryable,
            "attempts": failure.attempts,
        }),
    )
}

async fn review(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<ProposalSubmission>, JsonRejection>,
) -> Response {
    let submission = match payload {
        Ok(Json(submission)) => submission,
        Err(rejection) if rejection.status() == StatusCode::PAYLOAD_TOO_LARGE => {
            return error_body(
                StatusCode::PAYLOAD_TOO_LARGE,
                "payload_too_large",
                "the request body exceeds the size limit",
                json!({ "reasons": ["PayloadTooLarge"], "retryable": false }),
            )
        }
        Err(rejection) => {
            return error_body(
                StatusCode::BAD_REQUEST,
                "invalid_body",
                &rejection.body_text(),
                json!({ "reasons": ["InvalidBody"], "retryable": false }),
            )
        }
    };

    let mut gateway = Gateway::new(state.provider.clone()).with_policy(state.policy);
    if let Some(sleeper) = &state.sleeper {
        gateway = gateway.with_sleeper(sleeper.clone());
    }
    if let Some(timeout) = state.attempt_timeout {
        gateway = gateway.with_attempt_timeout(timeout);
    }
    let pipeline = ReviewPipeline::new(state.engine.clone(), gateway, state.model_id.clone())
        .with_precheck(state.precheck_enabled);

    let response = match pipeline.review(&submission).await {
        Ok(response) => response,
        Err(ReviewError::Validation(failures)) => {
            let reasons: Vec<&str> = failures.iter().map(validation_reason).collect();
            let message = failures
                .iter()
                .map(|f| f.message())
                .collect::<Vec<_>>()
                .join("; ");
            return error_body(
                StatusCode::BAD_REQUEST,
                "validation_failed",
                &message,
                json!({ "reasons": reasons, "details": failures, "retryable": false }),
            );
        }
        Err(ReviewError::Guardrail(denials)) => {
            let reasons: Vec<&str> = denials.iter().map(denial_reason).collect();
            let message = denials
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return error_body(
                StatusCode::BAD_REQUEST,
                "guardrail_denied",
                &message,
                json!({ "reasons": reasons, "retryable": false }),
            );
        }
        Err(ReviewError::Prompt(e)) => {
            return error_body(
                StatusCode::BAD_REQUEST,
                "prompt_rejected",
                &e.to_string(),
                json!({ "reasons": ["PromptRejected"], "retryable": false }),
            )
        }
        Err(ReviewError::Provider(failure)) => {
            tracing::warn!(
                kind = %failure.error.kind,
                attempts = failure.attempts,
                "review failed at the provider"
            );
            return provider_failure(&failure);
        }
    };

    let status = match response.kind {
        ResponseKind::Report | ResponseKind::Refusal => StatusCode::OK,
        ResponseKind::Malformed => StatusCode::UNPROCESSABLE_ENTITY,
    };
    tracing::info!(
        kind = %response.kind,
        status = status.as_u16(),
        attempts = response.meta.attempts,
        "review served"
    );
    (status, Json(response)).into_response()
}
