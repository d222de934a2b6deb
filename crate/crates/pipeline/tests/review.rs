use std::path::PathBuf;
use std::sync::Arc;

use ethically_core::domain::{Priority, SubmissionLimits};
use ethically_core::guardrails::GuardrailDenial;
use ethically_core::report::{parse_report, ResponseKind};
use ethically_core::{PromptConfig, PromptEngine, ProposalSubmission};
use ethically_gateway::provider::ProviderErrorKind;
use ethically_gateway::{Gateway, MockProvider, MockStep, RecordingSleeper};
use ethically_pipeline::{
    matched_markers, parse_corpus, Harness, ReviewError, ReviewPipeline, RunSummary,
};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/fixtures")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn engine() -> PromptEngine {
    PromptEngine::new(PromptConfig::default(), SubmissionLimits::default()).unwrap()
}

fn pipeline(steps: Vec<MockStep>) -> (ReviewPipeline, Arc<MockProvider>) {
    let mock = Arc::new(MockProvider::new(steps));
    let gateway = Gateway::new(mock.clone()).with_sleeper(Arc::new(RecordingSleeper::default()));
    (ReviewPipeline::new(engine(), gateway, "mock-model"), mock)
}

fn submission() -> ProposalSubmission {
    ProposalSubmission::new(
        "Sociology",
        "Germany",
        "We will interview twenty adult volunteers about their commute to work and how it affects family life. \
         Interviews last one hour and are recorded with consent.",
    )
    .with_pii_confirmed(true)
}

#[tokio::test]
async fn report_gets_disclaimer_and_notices() {
    let (pipeline, mock) = pipeline(vec![MockStep::Reply(fixture("table2.txt"))]);
    let response = pipeline.review(&submission()).await.unwrap();
    assert_eq!(response.kind, ResponseKind::Report);
    let report = response.report.unwrap();
    assert!(report.has_disclaimer());
    assert_eq!(report.risk.value, 5);
    assert_eq!(response.meta.attempts, 1);
    assert_eq!(response.meta.model_id, "mock-model");
    assert_eq!(
        response.meta.prompt_version,
        pipeline.engine().prompt_version()
    );
    assert!(!response.notices.is_empty());
    assert_eq!(mock.calls(), 1);
}

#[tokio::test]
async fn refusal_and_malformed_pass_through() {
    let (p, _) = pipeline(vec![MockStep::Reply(fixture("refusal.txt"))]);
    let response = p.review(&submission()).await.unwrap();
    assert_eq!(response.kind, ResponseKind::Refusal);
    assert!(response.report.is_none());

    let (p, _) = pipeline(vec![MockStep::Reply(fixture("malformed.txt"))]);
    let response = p.review(&submission()).await.unwrap();
    assert_eq!(response.kind, ResponseKind::Malformed);
    assert_eq!(response.raw_text, fixture("malformed.txt"));
}

#[tokio::test]
async fn guardrails_run_before_the_provider() {
    let (p, mock) = pipeline(vec![MockStep::Reply(fixture("table2.txt"))]);
    let err = p
        .review(&submission().with_pii_confirmed(false))
        .await
        .unwrap_err();
    assert!(matches!(err, ReviewError::Guardrail(d) if d == [GuardrailDenial::PiiNotConfirmed]));
    let err = p
        .review(&ProposalSubmission::new("Sociology", "Germany", "").with_pii_confirmed(true))
        .await
        .unwrap_err();
    assert!(matches!(err, ReviewError::Validation(_)));
    assert_eq!(mock.calls(), 0);
}

#[tokio::test]
async fn provider_failure_reports_attempts() {
    let (p, mock) = pipeline(vec![MockStep::Fail(ProviderErrorKind::Overloaded)]);
    match p.review(&submission()).await.unwrap_err() {
        ReviewError::Provider(failure) => {
            assert_eq!(failure.attempts, 3);
            assert!(failure.error.retryable);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(mock.calls(), 3);
}

#[test]
fn minor_issue_does_not_satisfy_high_threshold() {
    let report = parse_report(&fixture("table2.txt")).report.unwrap();
    // "opt-out mechanism" only appears under Minor Considerations.
    let minor_only = vec!["opt-out mechanism".to_string()];
    assert_eq!(
        matched_markers(&report, &minor_only, Priority::Minor),
        minor_only
    );
    assert!(matched_markers(&report, &minor_only, Priority::Moderate).is_empty());
    assert!(matched_markers(&report, &minor_only, Priority::High).is_empty());
    // Threshold monotonicity over every marker in the report vocabulary.
    let vocabulary: Vec<String> = [
        "conflict of interest",
        "dual role",
        "coercion",
        "consent",
        "storage",
        "privacy",
    ]
    .map(String::from)
    .to_vec();
    let high = matched_markers(&report, &vocabulary, Priority::High);
    let moderate = matched_markers(&report, &vocabulary, Priority::Moderate);
    let minor = matched_markers(&report, &vocabulary, Priority::Minor);
    assert!(high.iter().all(|m| moderate.contains(m)));
    assert!(moderate.iter().all(|m| minor.contains(m)));
    // Adding markers never removes a match.
    let mut more = vocabulary.clone();
    more.push("no such phrase".into());
    let wider = matched_markers(&report, &more, Priority::Moderate);
    assert!(moderate.iter().all(|m| wider.contains(m)));
}

const TWO_CASES: &str = r#"{"id":"ok","discipline":"Sociology","region":"Germany","proposal_text":"We will interview adult volunteers about commuting.","target_issue":"none","markers":["conflict of interest"]}
{"id":"broken","discipline":"Sociology","region":"Germany","proposal_text":"We will interview adult volunteers about commuting.","target_issue":"none","markers":["conflict of interest"]}
"#;

struct Scripted;

impl ethically_gateway::ProviderSource for Scripted {
    fn provider_for(
        &self,
        case_id: &str,
    ) -> Result<Arc<dyn ethically_gateway::Provider>, ethically_gateway::ProviderError> {
        let step = if case_id == "broken" {
            MockStep::Fail(ProviderErrorKind::AuthFailure)
        } else {
            MockStep::Reply(fixture("table2.txt"))
        };
        Ok(Arc::new(MockProvider::new(vec![step])))
    }
}

#[tokio::test]
async fn failed_cases_are_counted_not_dropped() {
    let cases = parse_corpus(TWO_CASES).unwrap();
    let results = Harness::new(engine(), "mock-model")
        .run_corpus(&cases, &Scripted)
        .await;
    let broken = results.iter().find(|r| r.id == "broken").unwrap();
    assert_eq!(broken.kind, None);
    assert_eq!(broken.attempts, 1);
    assert!(broken.error.as_deref().unwrap().contains("auth"));
    let summary = RunSummary::from_results(&results);
    assert_eq!((summary.total, summary.detected, summary.failed), (2, 1, 1));
    assert_eq!(summary.risk_histogram[&5], 1);
    assert_eq!(
        results.iter().filter(|r| r.detected).count(),
        summary.detected
    );
}
