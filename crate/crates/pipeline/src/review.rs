use ethically_core::domain::{validate_submission, ValidationFailure};
use ethically_core::guardrails::{
    attach_disclaimers, check_submission, review_notices, GuardrailAdvisory, GuardrailDenial,
};
use ethically_core::prompt::{PromptEngine, PromptError};
use ethically_core::report::{parse_report_with, ParseOptions, ResponseKind};
use ethically_core::{EthicsReport, ProposalSubmission};
use ethically_gateway::{Gateway, GatewayFailure, ProviderRequest};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("submission is invalid")]
    Validation(Vec<ValidationFailure>),
    #[error("submission was refused by guardrails")]
    Guardrail(Vec<GuardrailDenial>),
    #[error(transparent)]
    Prompt(PromptError),
    #[error(transparent)]
    Provider(GatewayFailure),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReviewMeta {
    pub model_id: String,
    pub latency_ms: u64,
    pub attempts: u32,
    pub prompt_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReviewResponse {
    pub kind: ResponseKind,
    pub report: Option<EthicsReport>,
    pub raw_text: String,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
    pub notices: Vec<String>,
    pub advisories: Vec<GuardrailAdvisory>,
    pub meta: ReviewMeta,
}

/// Validation, guardrails, prompt assembly, the provider call and parsing for
/// a single submission.
pub struct ReviewPipeline {
    engine: PromptEngine,
    gateway: Gateway,
    model_id: String,
    parse_options: ParseOptions,
    precheck_enabled: bool,
}

impl ReviewPipeline {
    pub fn new(engine: PromptEngine, gateway: Gateway, model_id: impl Into<String>) -> Self {
        Self {
            engine,
            gateway,
            model_id: model_id.into(),
            parse_options: ParseOptions::default(),
            precheck_enabled: true,
        }
    }

    pub fn with_parse_options(mut self, options: ParseOptions) -> Self {
        self.parse_options = options;
        self
    }

    pub fn with_precheck(mut self, enabled: bool) -> Self {
        self.precheck_enabled = enabled;
        self
    }

    pub fn engine(&self) -> &PromptEngine {
        &self.engine
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub async fn review(
        &self,
        submission: &ProposalSubmission,
    ) -> Result<ReviewResponse, ReviewError> {
        let failures = validate_submission(submission, self.engine.limits());
        if !failures.is_empty() {
            return Err(ReviewError::Validation(failures));
        }
        let verdict = check_submission(submission, self.precheck_enabled);
        if !verdict.allowed() {
            return Err(ReviewError::Guardrail(verdict.denials));
        }

        let prompt = self
            .engine
            .assemble(submission)
            .map_err(ReviewError::Prompt)?;
        let request = ProviderRequest::new(
            prompt.system_text,
            prompt.user_text,
            self.model_id.clone(),
            prompt.prompt_version,
        );
        tracing::info!(
            request_id = %request.request_id,
            estimated_tokens = prompt.estimated_tokens,
            "sending review request"
        );
        let result = self
            .gateway
            .call(&request)
            .await
            .map_err(ReviewError::Provider)?;

        let outcome = parse_report_with(&result.raw_text, &self.parse_options);
        let mut warnings = outcome.warnings;
        let report = match (outcome.kind, outcome.report) {
            (ResponseKind::Report, Some(report)) => {
                let (report, warning) = attach_disclaimers(report);
                warnings.extend(warning);
                Some(report)
            }
            (_, report) => report,
        };
        tracing::info!(
            request_id = %request.request_id,
            kind = %outcome.kind,
            attempts = result.attempts,
            latency_ms = result.latency_ms,
            "review finished"
        );

        Ok(ReviewResponse {
            kind: outcome.kind,
            report,
            raw_text: result.raw_text,
            warnings,
            failures: outcome.failures,
            notices: review_notices(),
            advisories: verdict.advisories,
            meta: ReviewMeta {
                model_id: result.model_id,
                latency_ms: result.latency_ms,
                attempts: result.attempts,
                prompt_version: result.prompt_version,
            },
        })
    }
}
