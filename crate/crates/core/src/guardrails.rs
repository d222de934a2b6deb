//! Input and output guardrails: submission gating, the clinical-scope
//! precheck, disclaimer enforcement and log redaction.

use std::collections::HashSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::domain::{EthicsReport, ProposalSubmission, CAUTION_NOTICE, DISCLAIMER_TEXT};

/// Length of the character windows used to detect proposal text in logs.
pub const REDACTION_WINDOW: usize = 25;

const MAX_REDACTION_PASSES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum GuardrailDenial {
    PiiNotConfirmed,
    EmptySubmission,
}

impl GuardrailDenial {
    pub fn code(&self) -> &'static str {
        match self {
            GuardrailDenial::PiiNotConfirmed => "pii_not_confirmed",
            GuardrailDenial::EmptySubmission => "empty_submission",
        }
    }
}

impl fmt::Display for GuardrailDenial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardrailDenial::PiiNotConfirmed => f.write_str(
                "confirm that all personal identifying information has been removed before submitting",
            ),
            GuardrailDenial::EmptySubmission => f.write_str("the proposal text is empty"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum GuardrailAdvisory {
    /// The proposal mentions clinical or biomedical research; the model is
    /// expected to decline it.
    ClinicalPrecheckFlag { terms: Vec<String> },
}

impl fmt::Display for GuardrailAdvisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardrailAdvisory::ClinicalPrecheckFlag { terms } => write!(
                f,
                "proposal mentions clinical research terms ({}); clinical and biomedical studies are outside this tool's scope",
                terms.join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GuardrailVerdict {
    pub denials: Vec<GuardrailDenial>,
    pub advisories: Vec<GuardrailAdvisory>,
}

impl GuardrailVerdict {
    pub fn allowed(&self) -> bool {
        self.denials.is_empty()
    }
}

static CLINICAL_LEXICON: LazyLock<Vec<(&'static str, Regex)>> = LazyLock::new(|| {
    [
        (
            "randomized controlled trial",
            r"\brandomi[sz]ed[\s-]+controlled[\s-]+trials?\b",
        ),
        ("placebo", r"\bplacebos?\b"),
        ("double-blind", r"\bdouble[\s-]+blind(?:ed)?\b"),
        ("dosage", r"\bdos(?:e|es|ed|age|ages|ing)\b"),
        ("clinical trial", r"\bclinical[\s-]+trials?\b"),
        (
            "investigational drug",
            r"\binvestigational[\s-]+(?:drug|product|medicinal)s?\b",
        ),
        (
            "phase trial",
            r"\bphase[\s-]+(?:i{1,3}|iv|[1-4])[\s-]+(?:clinical[\s-]+)?trials?\b",
        ),
        ("pharmacokinetic", r"\bpharmacokinetics?\b"),
    ]
    .into_iter()
    .map(|(name, pattern)| (name, Regex::new(&format!("(?i){pattern}")).unwrap()))
    .collect()
});

/// Clinical-research terms found in `text`, in lexicon order.
pub fn clinical_terms(text: &str) -> Vec<&'static str> {
    CLINICAL_LEXICON
        .iter()
        .filter(|(_, re)| re.is_match(text))
        .map(|(name, _)| *name)
        .collect()
}

/// Gates a submission. The clinical precheck, when enabled, only adds an
/// advisory.
pub fn check_submission(
    submission: &ProposalSubmission,
    precheck_enabled: bool,
) -> GuardrailVerdict {
    let mut verdict = GuardrailVerdict::default();
    if !submission.pii_confirmed {
        verdict.denials.push(GuardrailDenial::PiiNotConfirmed);
    }
    if submission.proposal_text.trim().is_empty() {
        verdict.denials.push(GuardrailDenial::EmptySubmission);
    }
    if !precheck_enabled {
        return verdict;
    }
    let mut terms = clinical_terms(&submission.proposal_text);
    if let Some(extra) = submission.supplementary() {
        for term in clinical_terms(extra) {
            if !terms.contains(&term) {
                terms.push(term);
            }
        }
    }
    if !terms.is_empty() {
        verdict
            .advisories
            .push(GuardrailAdvisory::ClinicalPrecheckFlag {
                terms: terms.into_iter().map(String::from).collect(),
            });
    }
    verdict
}

/// Ensures the report carries the canonical disclaimer. Returns a warning
/// when the disclaimer had to be supplied. Applying it twice is a no-op.
pub fn attach_disclaimers(report: EthicsReport) -> (EthicsReport, Option<String>) {
    if report.has_disclaimer() {
        return (report, None);
    }
    let warning = if report.disclaimer.is_empty() {
        "report had no disclaimer; the standard disclaimer was added"
    } else {
        "report disclaimer was incomplete; the standard disclaimer was substituted"
    };
    let report = EthicsReport {
        disclaimer: DISCLAIMER_TEXT.to_string(),
        ..report
    };
    (report, Some(warning.to_string()))
}

/// Notices displayed with every review.
pub fn review_notices() -> Vec<String> {
    vec![CAUTION_NOTICE.to_string()]
}

/// Short fingerprint of a text that is safe to log.
pub fn fingerprint(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)[..8].to_string()
}

struct WindowSet {
    windows: HashSet<String>,
    whole: Vec<String>,
}

impl WindowSet {
    fn new(sources: &[&str]) -> Self {
        let mut windows = HashSet::new();
        let mut whole = Vec::new();
        for source in sources {
            let chars: Vec<char> = source.chars().collect();
            if chars.len() < REDACTION_WINDOW {
                if !source.trim().is_empty() {
                    whole.push(source.to_string());
                }
                continue;
            }
            for w in chars.windows(REDACTION_WINDOW) {
                windows.insert(w.iter().collect());
            }
        }
        Self { windows, whole }
    }

    /// Character coverage mask of `text` by known windows.
    fn covered(&self, text: &[char]) -> Vec<bool> {
        let mut mask = vec![false; text.len()];
        if text.len() >= REDACTION_WINDOW && !self.windows.is_empty() {
            for (start, w) in text.windows(REDACTION_WINDOW).enumerate() {
                let s: String = w.iter().collect();
                if self.windows.contains(&s) {
                    mask[start..start + REDACTION_WINDOW].fill(true);
                }
            }
        }
        mask
    }

    fn is_dirty(&self, text: &str) -> bool {
        let chars: Vec<char> = text.chars().collect();
        self.covered(&chars).contains(&true) || self.whole.iter().any(|w| text.contains(w.as_str()))
    }
}

/// Replaces every span of `text` that reproduces 25 or more consecutive
/// characters of the submission's proposal or supplementary materials with a
/// `[REDACTED:xxxxxxxx]` token.
pub fn redact_for_logs(text: &str, submission: &ProposalSubmission) -> String {
    let mut sources = vec![submission.proposal_text.as_str()];
    if let Some(extra) = submission.supplementary() {
        sources.push(extra);
    }
    redact_sources(text, &sources)
}

pub fn redact_sources(text: &str, sources: &[&str]) -> String {
    let set = WindowSet::new(sources);
    let token = format!(
        "[REDACTED:{}]",
        fingerprint(sources.first().copied().unwrap_or(""))
    );
    let mut current = text.to_string();
    for _ in 0..MAX_REDACTION_PASSES {
        if !set.is_dirty(&current) {
            return current;
        }
        for whole in &set.whole {
            current = current.replace(whole.as_str(), &token);
        }
        let chars: Vec<char> = current.chars().collect();
        let mask = set.covered(&chars);
        let mut out = String::with_capacity(current.len());
        let mut i = 0;
        while i < chars.len() {
            if mask[i] {
                while i < chars.len() && mask[i] {
                    i += 1;
                }
                out.push_str(&token);
            } else {
                out.push(chars[i]);
                i += 1;
            }
        }
        current = out;
    }
    if set.is_dirty(&current) {
        "[REDACTED]".to_string()
    } else {
        current
    }
}
