//! Batch evaluation of the reviewer against a corpus of proposals with known
//! planted issues.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use ethically_core::prompt::PromptEngine;
use ethically_core::report::ResponseKind;
use ethically_core::{EthicalIssue, EthicsReport, Priority, ProposalSubmission};
use ethically_gateway::{Gateway, ProviderSource, RetryPolicy, Sleeper};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::review::{ReviewError, ReviewPipeline};

fn default_min_priority() -> Priority {
    Priority::Moderate
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusCase {
    pub id: String,
    pub discipline: String,
    pub region: String,
    pub proposal_text: String,
    pub target_issue: String,
    pub markers: Vec<String>,
    #[serde(default = "default_min_priority")]
    pub min_priority: Priority,
    #[serde(default)]
    pub expected_refusal: bool,
}

impl CorpusCase {
    pub fn submission(&self) -> ProposalSubmission {
        ProposalSubmission::new(&self.discipline, &self.region, &self.proposal_text)
            .with_pii_confirmed(true)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus line {line}: {message}")]
    CorpusFormatError { line: usize, message: String },
    #[error("corpus line {line}: duplicate case id '{id}'")]
    DuplicateCaseId { line: usize, id: String },
    #[error("corpus has no cases")]
    EmptyCorpus,
}

/// Parses JSONL corpus text. Blank lines are skipped; line numbers are
/// 1-based.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusCase>, CorpusError> {
    let mut cases = Vec::new();
    let mut ids = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let case: CorpusCase =
            serde_json::from_str(raw).map_err(|e| CorpusError::CorpusFormatError {
                line,
                message: e.to_string(),
            })?;
        let format_error = |message: String| CorpusError::CorpusFormatError { line, message };
        if case.id.trim().is_empty() {
            return Err(format_error("case id is empty".into()));
        }
        if case.markers.is_empty() && !case.expected_refusal {
            return Err(format_error(format!("case '{}' has no markers", case.id)));
        }
        if let Some(bad) = case
            .markers
            .iter()
            .find(|m| m.trim().is_empty() || m.to_lowercase() != **m)
        {
            return Err(format_error(format!(
                "marker '{bad}' in case '{}' must be non-empty lowercase text",
                case.id
            )));
        }
        if !ids.insert(case.id.clone()) {
            return Err(CorpusError::DuplicateCaseId { line, id: case.id });
        }
        cases.push(case);
    }
    if cases.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(cases)
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusCase>, CorpusError> {
    parse_corpus(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseResult {
    pub id: String,
    /// `None` when the case could not be executed.
    pub kind: Option<ResponseKind>,
    pub detected: bool,
    pub matched_markers: Vec<String>,
    pub risk_value: Option<u8>,
    pub warnings: Vec<String>,
    pub attempts: u32,
    pub error: Option<String>,
}

fn issue_text(issue: &EthicalIssue) -> String {
    let mut text = format!("{}\n{}", issue.title, issue.problem);
    for rec in &issue.recommendations {
        text.push('\n');
        text.push_str(rec);
    }
    text.to_lowercase()
}

/// Markers found in any issue at or above `min_priority`, in marker order.
pub fn matched_markers(
    report: &EthicsReport,
    markers: &[String],
    min_priority: Priority,
) -> Vec<String> {
    let texts: Vec<String> = report
        .issues_at_least(min_priority)
        .map(issue_text)
        .collect();
    markers
        .iter()
        .filter(|m| texts.iter().any(|t| t.contains(&m.to_lowercase())))
        .cloned()
        .collect()
}

pub struct Harness {
    engine: PromptEngine,
    model_id: String,
    policy: RetryPolicy,
    attempt_timeout: Option<Duration>,
    sleeper: Option<Arc<dyn Sleeper>>,
    parallelism: usize,
}

impl Harness {
    pub fn new(engine: PromptEngine, model_id: impl Into<String>) -> Self {
        Self {
            engine,
            model_id: model_id.into(),
            policy: RetryPolicy::default(),
            attempt_timeout: None,
            sleeper: None,
            parallelism: 4,
        }
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism.max(1);
        self
    }

    pub fn with_policy(mut self, policy: RetryPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_attempt_timeout(mut self, timeout: Duration) -> Self {
        self.attempt_timeout = Some(timeout);
        self
    }

    pub fn with_sleeper(mut self, sleeper: Arc<dyn Sleeper>) -> Self {
        self.sleeper = Some(sleeper);
        self
    }

    fn pipeline(
        &self,
        source: &dyn ProviderSource,
        case_id: &str,
    ) -> Result<ReviewPipeline, String> {
        let provider = source.provider_for(case_id).map_err(|e| e.to_string())?;
        let mut gateway = Gateway::new(provider).with_policy(self.policy);
        if let Some(timeout) = self.attempt_timeout {
            gateway = gateway.with_attempt_timeout(timeout);
        }
        if let Some(sleeper) = &self.sleeper {
            gateway = gateway.with_sleeper(sleeper.clone());
        }
        Ok(ReviewPipeline::new(
            self.engine.clone(),
            gateway,
            self.model_id.clone(),
        ))
    }

    pub async fn run_case(&self, case: &CorpusCase, source: &dyn ProviderSource) -> CaseResult {
        let mut result = CaseResult {
            id: case.id.clone(),
            kind: None,
            detected: false,
            matched_markers: Vec::new(),
            risk_value: None,
            warnings: Vec::new(),
            attempts: 0,
            error: None,
        };
        let pipeline = match self.pipeline(source, &case.id) {
            Ok(p) => p,
            Err(e) => {
                result.error = Some(e);
                return result;
            }
        };
        match pipeline.review(&case.submission()).await {
            Ok(response) => {
                result.kind = Some(response.kind);
                result.attempts = response.meta.attempts;
                result.warnings = response.warnings;
                result.warnings.extend(response.failures);
                if let (ResponseKind::Report, Some(report)) = (response.kind, &response.report) {
                    result.risk_value = Some(report.risk.value);
                    result.matched_markers =
                        matched_markers(report, &case.markers, case.min_priority);
                }
                result.detected = !result.matched_markers.is_empty()
                    || (case.expected_refusal && response.kind == ResponseKind::Refusal);
            }
            Err(ReviewError::Provider(failure)) => {
                result.attempts = failure.attempts;
                result.error = Some(failure.to_string());
            }
            Err(e) => result.error = Some(e.to_string()),
        }
        result
    }

    /// Runs every case with bounded concurrency. Outcomes are sorted by id.
    pub async fn run_corpus(
        &self,
        cases: &[CorpusCase],
        source: &dyn ProviderSource,
    ) -> Vec<CaseResult> {
        let mut results: Vec<CaseResult> = stream::iter(cases)
            .map(|case| self.run_case(case, source))
            .buffer_unordered(self.parallelism)
            .collect()
            .await;
        results.sort_by(|a, b| a.id.cmp(&b.id));
        results
    }
}

fn serialize_rate<S: Serializer>(rate: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rate(*rate))
}

fn deserialize_rate<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let text = String::deserialize(d)?;
    if text == "n/a" {
        return Ok(None);
    }
    text.parse().map(Some).map_err(serde::de::Error::custom)
}

pub fn format_rate(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{r:.4}"),
        None => "n/a".to_string(),
    }
}

/// Aggregate metrics over a run. `detection_rate` is serialized with four
/// decimals, or "n/a" for an empty run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub total: usize,
    pub detected: usize,
    #[serde(
        serialize_with = "serialize_rate",
        deserialize_with = "deserialize_rate"
    )]
    pub detection_rate: Option<f64>,
    pub refusals: usize,
    pub malformed: usize,
    pub failed: usize,
    /// Risk values of parsed reports, keyed 1 to 5.
    pub risk_histogram: BTreeMap<u8, usize>,
}

impl RunSummary {
    pub fn from_results(results: &[CaseResult]) -> Self {
        let mut risk_histogram: BTreeMap<u8, usize> = (1..=5).map(|v| (v, 0)).collect();
        for value in results.iter().filter_map(|r| r.risk_value) {
            *risk_histogram.entry(value).or_default() += 1;
        }
        let total = results.len();
        let detected = results.iter().filter(|r| r.detected).count();
        let count_kind = |kind| results.iter().filter(|r| r.kind == Some(kind)).count();
        Self {
            total,
            detected,
            detection_rate: (total > 0).then(|| detected as f64 / total as f64),
            refusals: count_kind(ResponseKind::Refusal),
            malformed: count_kind(ResponseKind::Malformed),
            failed: results.iter().filter(|r| r.error.is_some()).count(),
            risk_histogram,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(format!("unknown output format '{other}'")),
        }
    }
}

const SUMMARY_COLUMNS: [&str; 11] = [
    "total",
    "detected",
    "detection_rate",
    "refusals",
    "malformed",
    "failed",
    "risk_1",
    "risk_2",
    "risk_3",
    "risk_4",
    "risk_5",
];

fn summary_row(s: &RunSummary) -> Vec<String> {
    let mut row = vec![
        s.total.to_string(),
        s.detected.to_string(),
        format_rate(s.detection_rate),
        s.refusals.to_string(),
        s.malformed.to_string(),
        s.failed.to_string(),
    ];
    row.extend((1..=5).map(|v| s.risk_histogram.get(&v).copied().unwrap_or(0).to_string()));
    row
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn write_markdown(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}

pub fn emit_summary(summary: &RunSummary, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
            text.push('\n');
            text
        }
        OutputFormat::Csv => write_csv(&SUMMARY_COLUMNS, [summary_row(summary)]),
        OutputFormat::Markdown => write_markdown(&SUMMARY_COLUMNS, [summary_row(summary)]),
    }
}

const CASE_COLUMNS: [&str; 7] = [
    "id",
    "kind",
    "detected",
    "matched_markers",
    "risk_value",
    "attempts",
    "error",
];

fn case_row(r: &CaseResult) -> Vec<String> {
    vec![
        r.id.clone(),
        r.kind
            .map_or_else(|| "error".to_string(), |k| k.to_string()),
        r.detected.to_string(),
        r.matched_markers.join("; "),
        r.risk_value.map(|v| v.to_string()).unwrap_or_default(),
        r.attempts.to_string(),
        r.error.clone().unwrap_or_default(),
    ]
}

/// Per-case listing in the same formats as [`emit_summary`].
pub fn emit_cases(results: &[CaseResult], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(results).expect("results serialize");
            text.push('\n');
            text
        }
        OutputFormat::Csv => write_csv(&CASE_COLUMNS, results.iter().map(case_row)),
        OutputFormat::Markdown => write_markdown(&CASE_COLUMNS, results.iter().map(case_row)),
    }
}
