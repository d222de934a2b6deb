//! Parsing of free-text ethics reports into [`EthicsReport`], refusal
//! classification, validation and canonical rendering.
//!
//! Parsing is lenient: heading matching ignores case, markdown ornament
//! (`#`, `**`, bullets) and numbering, and anything that cannot be placed is
//! reported as a warning instead of being dropped. [`ParseOptions::strict`]
//! turns every warning into a failure.

use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    canonical_risk_label, risk_label, ComplianceFinding, ComplianceStatus, EthicalIssue,
    EthicsReport, Framework, Priority, RiskScore, DISCLAIMER_KEY_PHRASE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Report,
    Refusal,
    Malformed,
}

impl fmt::Display for ResponseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResponseKind::Report => "report",
            ResponseKind::Refusal => "refusal",
            ResponseKind::Malformed => "malformed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub kind: ResponseKind,
    pub report: Option<EthicsReport>,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Treat every warning as a failure.
    pub strict: bool,
}

impl ParseOptions {
    pub fn strict() -> Self {
        Self { strict: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RiskScoreError {
    #[error("no risk score declaration found")]
    NoRiskScoreFound,
    #[error("conflicting risk score declarations: {values:?}")]
    AmbiguousRiskScore { values: Vec<i64> },
    #[error("declared risk score {0} is outside the 1-5 rubric")]
    OutOfRange(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ReportWarning {
    MissingDisclaimer,
    HighIssueWithLowRisk { risk: u8 },
    HighIssueWithoutRecommendations { title: String },
    EmptyFindingDetail { framework: Framework },
}

impl fmt::Display for ReportWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportWarning::MissingDisclaimer => write!(
                f,
                "report disclaimer does not state that it {DISCLAIMER_KEY_PHRASE}"
            ),
            ReportWarning::HighIssueWithLowRisk { risk } => write!(
                f,
                "report raises a high-priority issue but assigns risk score {risk}"
            ),
            ReportWarning::HighIssueWithoutRecommendations { title } => {
                write!(f, "high-priority issue '{title}' has no recommendations")
            }
            ReportWarning::EmptyFindingDetail { framework } => {
                write!(f, "{framework} finding has a status but no detail")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", rename_all = "snake_case")]
pub enum ReportFailure {
    LabelValueMismatch { value: u8, label: String },
    RiskOutOfRange { value: u8 },
}

impl fmt::Display for ReportFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportFailure::LabelValueMismatch { value, label } => write!(
                f,
                "risk score {value} is labelled '{label}', which does not match the rubric"
            ),
            ReportFailure::RiskOutOfRange { value } => {
                write!(f, "risk score {value} is outside the 1-5 rubric")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReportValidation {
    pub warnings: Vec<ReportWarning>,
    pub failures: Vec<ReportFailure>,
}

impl ReportValidation {
    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty() && self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SectionKind {
    Summary = 1,
    Compliance = 2,
    Issues = 3,
    Risk = 4,
    Supplementary = 5,
}

impl SectionKind {
    fn title(self) -> &'static str {
        match self {
            SectionKind::Summary => "Summary Assessment",
            SectionKind::Compliance => "Compliance Analysis",
            SectionKind::Issues => "Potential Ethical Issues and Recommendations",
            SectionKind::Risk => "Ethics Risk Score",
            SectionKind::Supplementary => "Supplementary Materials Assessment",
        }
    }
}

static HEADER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(?:section\s+)?(?:\d+\s*[.):]\s*)?(summary\s+assessment|compliance\s+analysis|potential\s+ethical\s+issues(?:\s+and\s+recommendations)?|ethical\s+issues\s+and\s+recommendations|ethic(?:s|al)\s+risk\s+score|risk\s+score|supplementary\s+materials?(?:\s+assessment)?)(.*)$",
    )
    .unwrap()
});

static DECLARATION_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(?:\d+\s*[.):]\s*)?(?:[a-z][a-z /&-]{0,40}?\s)?risk\s+score\s*(?:\(\s*1\s*-\s*5\s*\))?\s*[:=\-–—]\s*(\d+)(?:\s*/\s*5)?(.*)$",
    )
    .unwrap()
});

static BARE_SCORE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^(?:(?:score|rating)\s*[:=\-–—]\s*)?(\d+)(?:\s*/\s*5)?(\s*\(.*|\s*[-–—:].*)?$")
        .unwrap()
});

static TIER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(high|moderate|medium|minor|low)(?:[\s-]+priority)?(?:\s+(?:issues|concerns|considerations))?\s*:?$",
    )
    .unwrap()
});

static NUMBERED_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d{1,3})[.)]\s+(.+)$").unwrap());

static PROBLEM_LABEL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^(?:problem|issue|description)\s*:\s*(.*)$").unwrap());

static RECOMMENDATIONS_LABEL_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(?:recommendations?|recommended\s+actions|suggestions|alternative\s+approaches|alternatives)\s*:\s*(.*)$",
    )
    .unwrap()
});

const MARKER_ALTERNATION: &str =
    r"major\s+violation|major\s+concern|not\s+applicable|n/a|adequate|partial|concern";

static LEADING_MARKER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)^({MARKER_ALTERNATION})\s*(?:$|[:\-–—]\s*(.*)$)"
    ))
    .unwrap()
});

static SUBJECT_MARKER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?i)^(.{{1,80}}?)(?:\s+[-–—]\s+|\s*:\s*|\s*\()({MARKER_ALTERNATION})\)?\s*(?:$|[:\-–—]\s*(.*)$)"
    ))
    .unwrap()
});

static UNKNOWN_MARKER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Z][A-Z/ ]{1,30}[A-Z])\s*:\s*\S").unwrap());

const DECLINE_CUES: [&str; 8] = [
    "decline",
    "cannot review",
    "can't review",
    "unable to review",
    "not able to review",
    "outside the scope",
    "outside of the scope",
    "beyond the scope",
];

const CLINICAL_CUES: [&str; 4] = ["clinical", "biomedical", "drug trial", "medical trial"];

/// Strips markdown ornament: surrounding whitespace, leading `#`s and all
/// `**` emphasis markers.
fn normalize(raw: &str) -> String {
    let without_bold = raw.replace("**", "");
    let trimmed = without_bold.trim();
    trimmed.trim_start_matches('#').trim().to_string()
}

fn strip_bullet(line: &str) -> &str {
    for prefix in ["- ", "* ", "• ", "– ", "+ "] {
        if let Some(rest) = line.strip_prefix(prefix) {
            return rest.trim_start();
        }
    }
    line
}

fn snippet(text: &str) -> String {
    const MAX: usize = 80;
    if text.chars().count() <= MAX {
        text.to_string()
    } else {
        let cut: String = text.chars().take(MAX).collect();
        format!("{cut}...")
    }
}

fn section_header(line: &str) -> Option<SectionKind> {
    let text = strip_bullet(line);
    let caps = HEADER_RE.captures(text)?;
    let name = caps[1].to_ascii_lowercase();
    let rest = caps[2].trim();
    let kind = if name.starts_with("summary") {
        SectionKind::Summary
    } else if name.starts_with("compliance") {
        SectionKind::Compliance
    } else if name.contains("issues") {
        SectionKind::Issues
    } else if name.contains("risk") {
        SectionKind::Risk
    } else {
        SectionKind::Supplementary
    };
    let rest_ok = match kind {
        SectionKind::Risk => !rest.starts_with(|c: char| c.is_alphanumeric()),
        _ => rest.is_empty() || rest == ":",
    };
    rest_ok.then_some(kind)
}

struct Section {
    kind: SectionKind,
    header_line: usize,
    lines: Vec<usize>,
}

/// Normalized lines of a response with the section layout found in them.
struct Skeleton {
    lines: Vec<String>,
    raw_heading: Vec<bool>,
    preamble: Vec<usize>,
    sections: Vec<Section>,
}

impl Skeleton {
    fn scan(text: &str) -> Self {
        let lines: Vec<String> = text.lines().map(normalize).collect();
        let raw_heading = text
            .lines()
            .map(|raw| {
                let t = raw.trim();
                t.starts_with('#') || (t.len() > 4 && t.starts_with("**") && t.ends_with("**"))
            })
            .collect();
        let mut preamble = Vec::new();
        let mut sections: Vec<Section> = Vec::new();
        for (idx, line) in lines.iter().enumerate() {
            if line.is_empty() {
                continue;
            }
            let current = sections.last().map(|s| s.kind);
            match section_header(line) {
                Some(kind) if current.is_none_or(|c| kind > c) => sections.push(Section {
                    kind,
                    header_line: idx,
                    lines: Vec::new(),
                }),
                _ => match sections.last_mut() {
                    Some(section) => section.lines.push(idx),
                    None => preamble.push(idx),
                },
            }
        }
        Self {
            lines,
            raw_heading,
            preamble,
            sections,
        }
    }

    fn section(&self, kind: SectionKind) -> Option<&Section> {
        self.sections.iter().find(|s| s.kind == kind)
    }

    fn missing_required(&self) -> Vec<SectionKind> {
        [
            SectionKind::Summary,
            SectionKind::Compliance,
            SectionKind::Issues,
            SectionKind::Risk,
        ]
        .into_iter()
        .filter(|k| self.section(*k).is_none())
        .collect()
    }

    fn is_report(&self) -> bool {
        self.missing_required().is_empty()
    }

    fn texts<'a>(&'a self, section: &'a Section) -> impl Iterator<Item = &'a str> + 'a {
        section.lines.iter().map(|i| self.lines[*i].as_str())
    }
}

fn looks_like_refusal(text: &str, skeleton: &Skeleton) -> bool {
    let lower = text.to_lowercase();
    DECLINE_CUES.iter().any(|c| lower.contains(c))
        && CLINICAL_CUES.iter().any(|c| lower.contains(c))
        && declarations(skeleton).is_empty()
}

/// Structural classification of a provider response.
pub fn classify_response(text: &str) -> ResponseKind {
    let skeleton = Skeleton::scan(text);
    if skeleton.is_report() {
        ResponseKind::Report
    } else if looks_like_refusal(text, &skeleton) {
        ResponseKind::Refusal
    } else {
        ResponseKind::Malformed
    }
}

struct Declaration {
    line: usize,
    value: i64,
    stated_label: Option<String>,
}

fn stated_label(rest: &str) -> Option<String> {
    let rest = rest.trim();
    if let Some(inner) = rest.strip_prefix('(') {
        let label = inner.split(')').next().unwrap_or("").trim();
        return (!label.is_empty()).then(|| label.to_string());
    }
    let tail = rest.trim_start_matches(['-', '–', '—', ':']).trim();
    let lower = tail.to_lowercase();
    (!tail.is_empty() && lower.ends_with("risk") && tail.split_whitespace().count() <= 3)
        .then(|| tail.to_string())
}

fn parse_value(digits: &str) -> i64 {
    digits.parse().unwrap_or(i64::MAX)
}

fn declarations(skeleton: &Skeleton) -> Vec<Declaration> {
    let mut found = Vec::new();
    for (idx, line) in skeleton.lines.iter().enumerate() {
        let text = strip_bullet(line);
        if let Some(caps) = DECLARATION_RE.captures(text) {
            found.push(Declaration {
                line: idx,
                value: parse_value(&caps[1]),
                stated_label: stated_label(&caps[2]),
            });
            continue;
        }
        // "4. Ethics Risk Score" with the value on the next non-empty line.
        if section_header(line) == Some(SectionKind::Risk) {
            let next = skeleton
                .lines
                .iter()
                .enumerate()
                .skip(idx + 1)
                .find(|(_, l)| !l.is_empty());
            if let Some((next_idx, next_line)) = next {
                if let Some(caps) = BARE_SCORE_RE.captures(strip_bullet(next_line)) {
                    found.push(Declaration {
                        line: next_idx,
                        value: parse_value(&caps[1]),
                        stated_label: caps.get(2).and_then(|m| stated_label(m.as_str())),
                    });
                }
            }
        }
    }
    found
}

fn risk_from_skeleton(skeleton: &Skeleton) -> Result<RiskScore, RiskScoreError> {
    let found = declarations(skeleton);
    if found.is_empty() {
        return Err(RiskScoreError::NoRiskScoreFound);
    }
    let mut values: Vec<i64> = found.iter().map(|d| d.value).collect();
    values.dedup();
    let mut distinct = values.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > 1 {
        return Err(RiskScoreError::AmbiguousRiskScore { values });
    }

    let issues_start = skeleton
        .section(SectionKind::Issues)
        .map(|s| s.header_line)
        .unwrap_or(0);
    let chosen = found
        .iter()
        .find(|d| d.line > issues_start)
        .unwrap_or(&found[0]);
    let label = risk_label(chosen.value).map_err(|_| RiskScoreError::OutOfRange(chosen.value))?;
    let label = match &chosen.stated_label {
        Some(stated) => canonical_risk_label(stated)
            .map(str::to_string)
            .unwrap_or_else(|| stated.clone()),
        None => label.to_string(),
    };

    let mut justification = Vec::new();
    for line in skeleton.lines.iter().skip(chosen.line + 1) {
        if line.is_empty() {
            continue;
        }
        if section_header(line).is_some() {
            break;
        }
        let text = if justification.is_empty() {
            strip_label(line, "justification")
        } else {
            line.as_str()
        };
        if !text.is_empty() {
            justification.push(text.to_string());
        }
    }

    Ok(RiskScore {
        value: chosen.value as u8,
        label,
        justification: justification.join("\n"),
    })
}

fn strip_label<'a>(line: &'a str, label: &str) -> &'a str {
    let lower = line.to_ascii_lowercase();
    if lower.starts_with(label) {
        let rest = &line[label.len()..];
        if let Some(after) = rest.trim_start().strip_prefix(':') {
            return after.trim();
        }
    }
    line
}

/// Finds the risk-score declaration and its justification.
///
/// Declarations are lines that start (after numbering) with a heading ending
/// in "Risk Score" followed by a separator and an integer; rubric lines such
/// as "5 (High Risk): ..." never qualify. When several declarations carry the
/// same value, the first one after the issues section is used.
pub fn extract_risk_score(text: &str) -> Result<RiskScore, RiskScoreError> {
    risk_from_skeleton(&Skeleton::scan(text))
}

fn framework_heading(line: &str) -> Option<Framework> {
    let text = line.trim_end_matches(':').trim();
    if text.contains(':') || text.split_whitespace().count() > 8 {
        return None;
    }
    let lower = text.to_lowercase();
    if lower.contains("nuremberg") {
        Some(Framework::NurembergCode)
    } else if lower.contains("belmont") {
        Some(Framework::BelmontReport)
    } else if lower.contains("helsinki") {
        Some(Framework::DeclarationOfHelsinki)
    } else if lower.contains("discipline") {
        Some(Framework::DisciplineSpecific)
    } else if lower.contains("legal") || lower.contains("regulatory") {
        Some(Framework::LegalRegulatory)
    } else {
        None
    }
}

fn is_grouping_heading(line: &str) -> bool {
    let text = line.trim_end_matches(':').trim();
    let lower = text.to_lowercase();
    !text.contains(':')
        && !text.ends_with('.')
        && text.split_whitespace().count() <= 6
        && ["principles", "frameworks", "standards"]
            .iter()
            .any(|w| lower.ends_with(w))
}

fn parse_compliance<'a>(
    lines: impl Iterator<Item = &'a str>,
    warnings: &mut Vec<String>,
) -> Vec<ComplianceFinding> {
    let mut findings = Vec::new();
    let mut current: Option<Framework> = None;
    let framework_for = |current: Option<Framework>, warnings: &mut Vec<String>, line: &str| {
        current.unwrap_or_else(|| {
            warnings.push(format!(
                "compliance finding before any framework heading, filed under {}: {}",
                Framework::DisciplineSpecific,
                snippet(line)
            ));
            Framework::DisciplineSpecific
        })
    };

    for line in lines {
        let text = strip_bullet(line);
        if let Some(caps) = LEADING_MARKER_RE.captures(text) {
            let status = ComplianceStatus::from_marker(&caps[1]).expect("alternation is known");
            let detail = caps.get(2).map_or("", |m| m.as_str()).trim().to_string();
            let framework = framework_for(current, warnings, text);
            findings.push(ComplianceFinding {
                framework,
                status,
                detail,
            });
        } else if let Some(caps) = SUBJECT_MARKER_RE.captures(text) {
            let status = ComplianceStatus::from_marker(&caps[2]).expect("alternation is known");
            let subject = caps[1].trim();
            let rest = caps.get(3).map_or("", |m| m.as_str()).trim();
            let detail = if rest.is_empty() {
                subject.to_string()
            } else {
                format!("{subject}: {rest}")
            };
            let framework = framework_for(current, warnings, text);
            findings.push(ComplianceFinding {
                framework,
                status,
                detail,
            });
        } else if let Some(framework) = framework_heading(text) {
            current = Some(framework);
        } else if is_grouping_heading(text) {
            continue;
        } else {
            let framework = framework_for(current, warnings, text);
            match UNKNOWN_MARKER_RE.captures(text) {
                Some(caps) => warnings.push(format!(
                    "unknown compliance status marker '{}', recorded as CONCERN",
                    &caps[1]
                )),
                None => warnings.push(format!(
                    "compliance line without a status marker, recorded as CONCERN: {}",
                    snippet(text)
                )),
            }
            findings.push(ComplianceFinding {
                framework,
                status: ComplianceStatus::Concern,
                detail: text.to_string(),
            });
        }
    }
    findings
}

fn tier_heading(line: &str) -> Option<Priority> {
    let caps = TIER_RE.captures(strip_bullet(line))?;
    match caps[1].to_ascii_lowercase().as_str() {
        "high" => Some(Priority::High),
        "moderate" | "medium" => Some(Priority::Moderate),
        _ => Some(Priority::Minor),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum IssueMode {
    Title,
    Problem,
    Recommendations,
}

struct IssueDraft {
    priority: Priority,
    title: String,
    problem: Vec<String>,
    recommendations: Vec<String>,
    mode: IssueMode,
    last_rec_number: Option<u32>,
}

impl IssueDraft {
    fn new(priority: Priority, title: &str) -> Self {
        Self {
            priority,
            title: title.trim().trim_end_matches(':').trim().to_string(),
            problem: Vec::new(),
            recommendations: Vec::new(),
            mode: IssueMode::Title,
            last_rec_number: None,
        }
    }

    fn finish(self) -> EthicalIssue {
        EthicalIssue {
            priority: self.priority,
            title: self.title,
            problem: self.problem.join("\n"),
            recommendations: self.recommendations,
        }
    }
}

fn start_issue(
    title: &str,
    tier: Option<Priority>,
    current: &mut Option<IssueDraft>,
    warnings: &mut Vec<String>,
    issues: &mut Vec<EthicalIssue>,
) {
    if let Some(done) = current.take() {
        issues.push(done.finish());
    }
    let priority = tier.unwrap_or_else(|| {
        warnings.push(format!(
            "issue listed before any priority heading, treated as Moderate: {}",
            snippet(title)
        ));
        Priority::Moderate
    });
    *current = Some(IssueDraft::new(priority, title));
}

fn parse_issues(
    skeleton: &Skeleton,
    section: &Section,
    warnings: &mut Vec<String>,
) -> Vec<EthicalIssue> {
    let mut issues = Vec::new();
    let mut tier: Option<Priority> = None;
    let mut tier_fresh = false;
    let mut current: Option<IssueDraft> = None;
    let mut last_number: Option<u32> = None;

    for &idx in &section.lines {
        let line = skeleton.lines[idx].as_str();
        if let Some(priority) = tier_heading(line) {
            if let Some(done) = current.take() {
                issues.push(done.finish());
            }
            tier = Some(priority);
            tier_fresh = true;
            continue;
        }

        if let Some(caps) = NUMBERED_RE.captures(line) {
            let number: u32 = caps[1].parse().unwrap_or(0);
            let mode = current.as_ref().map(|c| c.mode);
            let continues_recs = current.as_ref().is_some_and(|c| {
                c.mode == IssueMode::Recommendations
                    && match c.last_rec_number {
                        None => number == 1,
                        Some(r) => number == r + 1,
                    }
            });
            let is_new = !continues_recs
                && match (current.as_ref(), last_number) {
                    (None, _) | (_, None) => true,
                    (Some(_), Some(last)) => {
                        number == last + 1
                            || (tier_fresh && number == 1)
                            || (mode != Some(IssueMode::Recommendations) && number > last)
                    }
                };
            if is_new {
                start_issue(&caps[2], tier, &mut current, warnings, &mut issues);
                last_number = Some(number);
                tier_fresh = false;
                continue;
            }
            if let Some(draft) = current.as_mut() {
                if draft.mode == IssueMode::Recommendations {
                    draft.last_rec_number = Some(number);
                    draft.recommendations.push(caps[2].trim().to_string());
                    continue;
                }
            }
        } else {
            // Markdown titles (`### Title`, `**Title**`) start an issue even when unnumbered.
            if is_raw_heading(skeleton, idx)
                && !PROBLEM_LABEL_RE.is_match(strip_bullet(line))
                && !RECOMMENDATIONS_LABEL_RE.is_match(strip_bullet(line))
            {
                start_issue(line, tier, &mut current, warnings, &mut issues);
                tier_fresh = false;
                continue;
            }
        }

        let text = strip_bullet(line);
        if let Some(caps) = PROBLEM_LABEL_RE.captures(text) {
            let draft = current.get_or_insert_with(|| {
                warnings.push("problem description before any issue title".into());
                IssueDraft::new(tier.unwrap_or(Priority::Moderate), "Untitled issue")
            });
            draft.mode = IssueMode::Problem;
            let rest = caps[1].trim();
            if !rest.is_empty() {
                draft.problem.push(rest.to_string());
            }
            continue;
        }
        if let Some(caps) = RECOMMENDATIONS_LABEL_RE.captures(text) {
            let draft = current.get_or_insert_with(|| {
                warnings.push("recommendations before any issue title".into());
                IssueDraft::new(tier.unwrap_or(Priority::Moderate), "Untitled issue")
            });
            draft.mode = IssueMode::Recommendations;
            let rest = caps[1].trim();
            if !rest.is_empty() {
                draft.recommendations.push(rest.to_string());
            }
            continue;
        }

        match current.as_mut() {
            None => warnings.push(format!(
                "unrecognized content in issues section: {}",
                snippet(line)
            )),
            Some(draft) => match draft.mode {
                IssueMode::Title | IssueMode::Problem => {
                    draft.mode = IssueMode::Problem;
                    draft.problem.push(line.to_string());
                }
                IssueMode::Recommendations => draft.recommendations.push(text.to_string()),
            },
        }
    }
    if let Some(done) = current.take() {
        issues.push(done.finish());
    }
    issues
}

fn is_raw_heading(skeleton: &Skeleton, idx: usize) -> bool {
    skeleton.raw_heading[idx] && !skeleton.lines[idx].is_empty()
}

fn split_disclaimer(skeleton: &Skeleton, warnings: &mut Vec<String>) -> String {
    let lines: Vec<&str> = skeleton
        .preamble
        .iter()
        .map(|i| skeleton.lines[*i].as_str())
        .collect();
    let Some(start) = lines
        .iter()
        .position(|l| l.to_lowercase().contains("disclaimer"))
    else {
        for line in &lines {
            warnings.push(format!(
                "unrecognized content before the report: {}",
                snippet(line)
            ));
        }
        return String::new();
    };
    for line in &lines[..start] {
        warnings.push(format!(
            "unrecognized content before the disclaimer: {}",
            snippet(line)
        ));
    }
    let mut body: Vec<&str> = lines[start..].to_vec();
    if body[0]
        .trim_end_matches(':')
        .trim()
        .eq_ignore_ascii_case("disclaimer")
    {
        body.remove(0);
    }
    let text = body.join("\n");
    let unquoted = text
        .strip_prefix('"')
        .and_then(|t| t.strip_suffix('"'))
        .unwrap_or(&text);
    unquoted.trim().to_string()
}

/// Parses a provider response leniently.
pub fn parse_report(text: &str) -> ParseOutcome {
    parse_report_with(text, &ParseOptions::default())
}

pub fn parse_report_with(text: &str, options: &ParseOptions) -> ParseOutcome {
    let skeleton = Skeleton::scan(text);
    if !skeleton.is_report() {
        if looks_like_refusal(text, &skeleton) {
            return ParseOutcome {
                kind: ResponseKind::Refusal,
                report: None,
                warnings: Vec::new(),
                failures: Vec::new(),
            };
        }
        let failures = if text.trim().is_empty() {
            vec!["response is empty".to_string()]
        } else {
            skeleton
                .missing_required()
                .into_iter()
                .map(|k| format!("missing report section: {}", k.title()))
                .collect()
        };
        return ParseOutcome {
            kind: ResponseKind::Malformed,
            report: None,
            warnings: Vec::new(),
            failures,
        };
    }

    let mut warnings = Vec::new();
    let mut failures = Vec::new();

    let disclaimer = split_disclaimer(&skeleton, &mut warnings);
    let section_text = |kind: SectionKind| -> Option<String> {
        skeleton
            .section(kind)
            .map(|s| skeleton.texts(s).collect::<Vec<_>>().join("\n"))
    };

    let summary_assessment = section_text(SectionKind::Summary).unwrap_or_default();
    if summary_assessment.is_empty() {
        failures.push("summary assessment is empty".to_string());
    }

    let compliance = skeleton
        .section(SectionKind::Compliance)
        .map(|s| parse_compliance(skeleton.texts(s), &mut warnings))
        .unwrap_or_default();

    let issues = skeleton
        .section(SectionKind::Issues)
        .map(|s| parse_issues(&skeleton, s, &mut warnings))
        .unwrap_or_default();

    let risk = match risk_from_skeleton(&skeleton) {
        Ok(risk) => Some(risk),
        Err(e) => {
            failures.push(e.to_string());
            None
        }
    };

    let supplementary_assessment =
        section_text(SectionKind::Supplementary).filter(|s| !s.is_empty());

    let Some(risk) = risk else {
        return ParseOutcome {
            kind: ResponseKind::Malformed,
            report: None,
            warnings,
            failures,
        };
    };

    let report = EthicsReport {
        disclaimer,
        summary_assessment,
        compliance,
        issues,
        risk,
        supplementary_assessment,
        raw_text: text.to_string(),
    };

    let validation = validate_report(&report);
    warnings.extend(validation.warnings.iter().map(ToString::to_string));
    failures.extend(validation.failures.iter().map(ToString::to_string));

    if options.strict && !warnings.is_empty() {
        failures.extend(warnings.iter().map(|w| format!("strict: {w}")));
    }

    let kind = if failures.is_empty() {
        ResponseKind::Report
    } else {
        ResponseKind::Malformed
    };
    ParseOutcome {
        kind,
        report: Some(report),
        warnings,
        failures,
    }
}

/// Consistency checks on a report.
pub fn validate_report(report: &EthicsReport) -> ReportValidation {
    let mut v = ReportValidation::default();
    if !report.has_disclaimer() {
        v.warnings.push(ReportWarning::MissingDisclaimer);
    }
    let high: Vec<&EthicalIssue> = report
        .issues
        .iter()
        .filter(|i| i.priority == Priority::High)
        .collect();
    if !high.is_empty() && report.risk.value < 3 {
        v.warnings.push(ReportWarning::HighIssueWithLowRisk {
            risk: report.risk.value,
        });
    }
    for issue in high {
        if issue.recommendations.is_empty() {
            v.warnings
                .push(ReportWarning::HighIssueWithoutRecommendations {
                    title: issue.title.clone(),
                });
        }
    }
    for finding in &report.compliance {
        if finding.detail.trim().is_empty() && finding.status != ComplianceStatus::NotApplicable {
            v.warnings.push(ReportWarning::EmptyFindingDetail {
                framework: finding.framework,
            });
        }
    }
    match risk_label(i64::from(report.risk.value)) {
        Err(_) => v.failures.push(ReportFailure::RiskOutOfRange {
            value: report.risk.value,
        }),
        Ok(label) if label != report.risk.label => {
            v.failures.push(ReportFailure::LabelValueMismatch {
                value: report.risk.value,
                label: report.risk.label.clone(),
            })
        }
        Ok(_) => {}
    }
    v
}

fn compliance_heading(framework: Framework) -> &'static str {
    match framework {
        Framework::NurembergCode => "Nuremberg Code Compliance",
        Framework::BelmontReport => "Belmont Report Principles",
        Framework::DeclarationOfHelsinki => "Declaration of Helsinki",
        Framework::DisciplineSpecific => "Discipline-Specific Standards",
        Framework::LegalRegulatory => "Legal and Regulatory Compliance",
    }
}

#[derive(Clone, Copy)]
enum Style {
    Canonical,
    Markdown,
}

fn render(report: &EthicsReport, style: Style) -> String {
    let md = matches!(style, Style::Markdown);
    let h2 = if md { "## " } else { "" };
    let h3 = if md { "### " } else { "" };
    let h4 = if md { "#### " } else { "" };
    let bold = |s: &str| {
        if md {
            format!("**{s}**")
        } else {
            s.to_string()
        }
    };

    let mut out = String::new();
    let push_block = |out: &mut String, block: &str| {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(block);
        out.push('\n');
    };

    if !report.disclaimer.is_empty() {
        push_block(&mut out, &report.disclaimer);
    }
    push_block(
        &mut out,
        &format!("{h2}1. {}", SectionKind::Summary.title()),
    );
    push_block(&mut out, &report.summary_assessment);

    push_block(
        &mut out,
        &format!("{h2}2. {}", SectionKind::Compliance.title()),
    );
    let mut framework: Option<Framework> = None;
    for finding in &report.compliance {
        if framework != Some(finding.framework) {
            push_block(
                &mut out,
                &format!("{h3}{}:", compliance_heading(finding.framework)),
            );
            framework = Some(finding.framework);
        }
        let marker = bold(finding.status.marker());
        let line = if finding.detail.is_empty() {
            marker
        } else {
            format!("{marker}: {}", finding.detail)
        };
        if md {
            out.push_str(&format!("- {line}\n"));
        } else {
            out.push_str(&line);
            out.push('\n');
        }
    }

    push_block(&mut out, &format!("{h2}3. {}", SectionKind::Issues.title()));
    let mut tier: Option<Priority> = None;
    for (n, issue) in report.issues.iter().enumerate() {
        if tier != Some(issue.priority) {
            push_block(&mut out, &format!("{h3}{}", issue.priority.heading()));
            tier = Some(issue.priority);
        }
        let mut block = format!("{h4}{}. {}\n", n + 1, issue.title);
        let mut problem = issue.problem.lines();
        if let Some(first) = problem.next() {
            block.push_str(&format!("{} {first}\n", bold("Problem:")));
            for line in problem {
                block.push_str(line);
                block.push('\n');
            }
        }
        if !issue.recommendations.is_empty() {
            block.push_str(&bold("Recommendations:"));
            block.push('\n');
            for rec in &issue.recommendations {
                block.push_str(&format!("- {rec}\n"));
            }
        }
        push_block(&mut out, block.trim_end());
    }

    push_block(
        &mut out,
        &format!(
            "{h2}4. {}: {} ({})",
            SectionKind::Risk.title(),
            report.risk.value,
            report.risk.label
        ),
    );
    if !report.risk.justification.is_empty() {
        out.push_str(&format!(
            "{} {}\n",
            bold("Justification:"),
            report.risk.justification
        ));
    }

    push_block(
        &mut out,
        &format!("{h2}5. {}", SectionKind::Supplementary.title()),
    );
    if let Some(supplementary) = &report.supplementary_assessment {
        out.push_str(supplementary);
        out.push('\n');
    }
    out
}

/// Deterministic plain-text rendering in report section order.
/// `parse_report(render_canonical(r))` reproduces the structure of `r`.
pub fn render_canonical(report: &EthicsReport) -> String {
    render(report, Style::Canonical)
}

/// Markdown rendering for display. Parses back to the same structure.
pub fn render_markdown(report: &EthicsReport) -> String {
    render(report, Style::Markdown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DISCLAIMER_TEXT;
    use proptest::prelude::*;

    const GOLDEN: &str = include_str!("../../../data/fixtures/table2.txt");

    const MINIMAL: &str = "\
1. Summary Assessment
An anonymous online survey of adult hobby gardeners.

2. Compliance Analysis
Belmont Report Principles:
ADEQUATE: Consent is collected on the first page.

3. Potential Ethical Issues and Recommendations
Minor Considerations
1. Data retention
Problem: The retention period is not stated.
Recommendations:
- State how long responses are kept.

4. Ethics Risk Score: 1 (Low Risk)
Justification: No identifying data and no sensitive topics.
";

    #[test]
    fn golden_report_parses_into_expected_structure() {
        let outcome = parse_report(GOLDEN);
        assert_eq!(outcome.kind, ResponseKind::Report, "{:?}", outcome.failures);
        let report = outcome.report.unwrap();
        assert_eq!(report.risk.value, 5);
        assert_eq!(report.risk.label, "High Risk");
        assert!(report
            .risk
            .justification
            .starts_with("The fundamental conflict of interest"));
        let high: Vec<_> = report
            .issues
            .iter()
            .filter(|i| i.priority == Priority::High)
            .collect();
        assert_eq!(high.len(), 3);
        assert_eq!(report.issues.len(), 6);
        assert_eq!(
            report.issues[0].title,
            "Fundamental Conflict of Interest - Physician-Researcher Dual Role"
        );
        assert_eq!(report.issues[0].recommendations.len(), 4);
        assert!(report.issues[5].problem.is_empty());
        assert_eq!(report.issues[5].priority, Priority::Minor);
        assert!(report.compliance.iter().any(|f| {
            f.framework == Framework::NurembergCode && f.status == ComplianceStatus::MajorViolation
        }));
        let belmont: Vec<_> = report
            .compliance
            .iter()
            .filter(|f| f.framework == Framework::BelmontReport)
            .collect();
        assert_eq!(belmont.len(), 3);
        assert_eq!(belmont[0].status, ComplianceStatus::MajorConcern);
        assert!(belmont[0]
            .detail
            .starts_with("Respect for Persons: Autonomy"));
        assert!(report.has_disclaimer());
        assert!(report
            .supplementary_assessment
            .as_deref()
            .unwrap()
            .starts_with("Missing Critical Materials:"));
        assert_eq!(validate_report(&report), ReportValidation::default());
    }

    #[test]
    fn golden_unmarked_lines_are_kept_as_concerns() {
        let outcome = parse_report(GOLDEN);
        let report = outcome.report.unwrap();
        let legal: Vec<_> = report
            .compliance
            .iter()
            .filter(|f| f.framework == Framework::LegalRegulatory)
            .collect();
        assert_eq!(legal.len(), 3);
        assert!(legal.iter().all(|f| f.status == ComplianceStatus::Concern));
        assert!(outcome
            .warnings
            .iter()
            .any(|w| w.contains("without a status marker")));
        let strict = parse_report_with(GOLDEN, &ParseOptions::strict());
        assert_eq!(strict.kind, ResponseKind::Malformed);
    }

    #[test]
    fn minimal_report_parses() {
        let outcome = parse_report(MINIMAL);
        assert_eq!(outcome.kind, ResponseKind::Report);
        assert!(outcome.failures.is_empty());
        let report = outcome.report.unwrap();
        assert_eq!(report.disclaimer, "");
        assert_eq!(report.risk.value, 1);
        assert_eq!(report.supplementary_assessment, None);
        assert_eq!(
            report.issues[0].recommendations,
            vec!["State how long responses are kept."]
        );
        assert!(outcome
            .warnings
            .contains(&ReportWarning::MissingDisclaimer.to_string()));
    }

    #[test]
    fn markdown_styling_is_ignored() {
        let md = MINIMAL
            .replace("1. Summary Assessment", "## **1. Summary Assessment**")
            .replace(
                "Belmont Report Principles:",
                "### Belmont Report Principles",
            )
            .replace("ADEQUATE:", "- **ADEQUATE:**")
            .replace("Problem:", "**Problem:**")
            .replace(
                "4. Ethics Risk Score: 1",
                "## 4. Ethics Risk Score: **1/5**",
            );
        let a = parse_report(MINIMAL).report.unwrap();
        let b = parse_report(&md).report.unwrap();
        assert!(a.same_structure(&b), "{b:#?}");
    }

    #[test]
    fn missing_sections_are_malformed() {
        let text = MINIMAL.replace("2. Compliance Analysis", "Compliance");
        let outcome = parse_report(&text);
        assert_eq!(outcome.kind, ResponseKind::Malformed);
        assert!(outcome.failures[0].contains("Compliance Analysis"));
        assert_eq!(parse_report("").kind, ResponseKind::Malformed);
    }

    #[test]
    fn conflicting_scores_are_ambiguous() {
        let text = format!("{MINIMAL}\nOverall Risk Score: 3\n");
        assert_eq!(
            extract_risk_score(&text),
            Err(RiskScoreError::AmbiguousRiskScore { values: vec![1, 3] })
        );
        let outcome = parse_report(&text);
        assert_eq!(outcome.kind, ResponseKind::Malformed);
    }

    #[test]
    fn repeated_equal_scores_are_accepted() {
        let text = format!("{MINIMAL}\nFinal risk score: 1/5\n");
        assert_eq!(extract_risk_score(&text).unwrap().value, 1);
    }

    #[test]
    fn rubric_lines_are_not_declarations() {
        let rubric = "\
Risk levels used:
5 (High Risk): Serious concerns
2 (Low Risk): Minor concerns
";
        let text = format!("{rubric}{MINIMAL}");
        assert_eq!(extract_risk_score(&text).unwrap().value, 1);
        assert_eq!(
            extract_risk_score(rubric),
            Err(RiskScoreError::NoRiskScoreFound)
        );
    }

    #[test]
    fn score_on_the_line_after_the_header() {
        let text = MINIMAL.replace(
            "4. Ethics Risk Score: 1 (Low Risk)",
            "4. Ethics Risk Score\n\n2 (Low Risk)",
        );
        let risk = extract_risk_score(&text).unwrap();
        assert_eq!((risk.value, risk.label.as_str()), (2, "Low Risk"));
    }

    #[test]
    fn out_of_range_score() {
        let text = MINIMAL.replace("Score: 1 (Low Risk)", "Score: 7");
        assert_eq!(
            extract_risk_score(&text),
            Err(RiskScoreError::OutOfRange(7))
        );
        assert_eq!(parse_report(&text).kind, ResponseKind::Malformed);
    }

    #[test]
    fn label_mismatch_is_a_failure() {
        let text = MINIMAL.replace("(Low Risk)", "(High Risk)");
        let outcome = parse_report(&text);
        assert_eq!(outcome.kind, ResponseKind::Malformed);
        assert!(outcome
            .failures
            .iter()
            .any(|f| f.contains("does not match")));
    }

    #[test]
    fn refusal_is_recognized() {
        let text = "I must politely decline to review this proposal. It describes a clinical \
                    drug trial, and biomedical research is outside the scope of this tool.";
        assert_eq!(classify_response(text), ResponseKind::Refusal);
        let outcome = parse_report(text);
        assert_eq!(outcome.kind, ResponseKind::Refusal);
        assert!(outcome.report.is_none());
    }

    #[test]
    fn declining_without_clinical_context_is_malformed() {
        assert_eq!(
            classify_response("I decline to answer that."),
            ResponseKind::Malformed
        );
    }

    #[test]
    fn issues_before_a_tier_default_to_moderate() {
        let text = MINIMAL.replace("Minor Considerations\n", "");
        let outcome = parse_report(&text);
        assert_eq!(
            outcome.report.unwrap().issues[0].priority,
            Priority::Moderate
        );
        assert!(outcome
            .warnings
            .iter()
            .any(|w| w.contains("treated as Moderate")));
    }

    #[test]
    fn numbered_recommendations_stay_with_their_issue() {
        let text = MINIMAL.replace(
            "- State how long responses are kept.",
            "1. State how long responses are kept.\n2. Delete raw files after analysis.",
        );
        let report = parse_report(&text).report.unwrap();
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].recommendations.len(), 2);
    }

    #[test]
    fn validation_flags_inconsistencies() {
        let mut report = parse_report(MINIMAL).report.unwrap();
        report.disclaimer = DISCLAIMER_TEXT.into();
        report.issues[0].priority = Priority::High;
        report.issues[0].recommendations.clear();
        let v = validate_report(&report);
        assert_eq!(
            v.warnings,
            vec![
                ReportWarning::HighIssueWithLowRisk { risk: 1 },
                ReportWarning::HighIssueWithoutRecommendations {
                    title: "Data retention".into()
                }
            ]
        );
        report.risk.value = 9;
        assert_eq!(
            validate_report(&report).failures,
            vec![ReportFailure::RiskOutOfRange { value: 9 }]
        );
    }

    #[test]
    fn golden_survives_canonical_round_trip() {
        let report = parse_report(GOLDEN).report.unwrap();
        for text in [render_canonical(&report), render_markdown(&report)] {
            let again = parse_report(&text);
            assert_eq!(again.kind, ResponseKind::Report, "{:?}", again.failures);
            assert!(
                report.same_structure(again.report.as_ref().unwrap()),
                "{text}"
            );
        }
    }

    #[test]
    fn truncated_golden_report_never_panics() {
        let boundaries: Vec<usize> = GOLDEN.char_indices().map(|(i, _)| i).collect();
        for &end in boundaries.iter().step_by(7) {
            let prefix = &GOLDEN[..end];
            let outcome = parse_report(prefix);
            assert_eq!(
                outcome.kind == ResponseKind::Report,
                outcome.failures.is_empty() && outcome.report.is_some()
            );
        }
    }

    const VOCAB: [&str; 24] = [
        "participants",
        "village",
        "archive",
        "survey",
        "school",
        "method",
        "women",
        "storage",
        "interview",
        "teacher",
        "photo",
        "quote",
        "transcript",
        "family",
        "museum",
        "union",
        "harbour",
        "garden",
        "letters",
        "youth",
        "elders",
        "songs",
        "records",
        "maps",
    ];

    fn sentence() -> impl Strategy<Value = String> {
        proptest::collection::vec(proptest::sample::select(&VOCAB[..]), 2..8).prop_map(|words| {
            let mut s = words.join(" ");
            s[..1].make_ascii_uppercase();
            s.push('.');
            s
        })
    }

    fn paragraph() -> impl Strategy<Value = String> {
        proptest::collection::vec(sentence(), 1..3).prop_map(|lines| lines.join("\n"))
    }

    fn finding() -> impl Strategy<Value = ComplianceFinding> {
        (
            proptest::sample::select(&Framework::ALL[..]),
            proptest::sample::select(&ComplianceStatus::ALL[..]),
            prop_oneof![4 => sentence(), 1 => Just(String::new())],
        )
            .prop_map(|(framework, status, detail)| ComplianceFinding {
                framework,
                status,
                detail,
            })
    }

    fn issue() -> impl Strategy<Value = EthicalIssue> {
        (
            prop_oneof![
                Just(Priority::High),
                Just(Priority::Moderate),
                Just(Priority::Minor)
            ],
            sentence(),
            prop_oneof![3 => paragraph(), 1 => Just(String::new())],
            proptest::collection::vec(sentence(), 0..4),
        )
            .prop_map(|(priority, title, problem, recommendations)| EthicalIssue {
                priority,
                title: title.trim_end_matches('.').to_string(),
                problem,
                recommendations,
            })
    }

    pub(crate) fn arb_report() -> impl Strategy<Value = EthicsReport> {
        (
            prop_oneof![Just(DISCLAIMER_TEXT.to_string()), Just(String::new())],
            paragraph(),
            proptest::collection::vec(finding(), 0..8),
            proptest::collection::vec(issue(), 0..7),
            1i64..=5,
            prop_oneof![3 => paragraph(), 1 => Just(String::new())],
            proptest::option::of(paragraph()),
        )
            .prop_map(
                |(disclaimer, summary, compliance, issues, value, just, supplementary)| {
                    EthicsReport {
                        disclaimer,
                        summary_assessment: summary,
                        compliance,
                        issues,
                        risk: RiskScore::new(value, just).unwrap(),
                        supplementary_assessment: supplementary,
                        raw_text: String::new(),
                    }
                },
            )
    }

    fn line_soup() -> impl Strategy<Value = String> {
        let fragment = prop_oneof![
            Just("1. Summary Assessment".to_string()),
            Just("## 2. Compliance Analysis".to_string()),
            Just("3. Potential Ethical Issues".to_string()),
            Just("4. Ethics Risk Score: 3".to_string()),
            Just("Risk Score: 99999999999999999999".to_string()),
            Just("5. Supplementary Materials".to_string()),
            Just("High Priority Issues".to_string()),
            Just("**Problem:**".to_string()),
            Just("Recommendations:".to_string()),
            Just("- MAJOR CONCERN:".to_string()),
            Just("Nuremberg Code".to_string()),
            Just("2) ".to_string()),
            Just("Justification:".to_string()),
            Just("\u{2022} \u{00e9}\u{0301}".to_string()),
            "\\PC{0,20}",
        ];
        proptest::collection::vec(fragment, 0..30).prop_map(|v| v.join("\n"))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn canonical_rendering_round_trips(report in arb_report()) {
            let text = render_canonical(&report);
            let outcome = parse_report(&text);
            prop_assert_eq!(outcome.kind, ResponseKind::Report, "{:?}\n{}", outcome.failures, text);
            let parsed = outcome.report.unwrap();
            prop_assert!(report.same_structure(&parsed), "{}\n{:#?}", text, parsed);
        }

        #[test]
        fn markdown_rendering_round_trips(report in arb_report()) {
            let text = render_markdown(&report);
            let parsed = parse_report(&text).report.unwrap();
            prop_assert!(report.same_structure(&parsed), "{}\n{:#?}", text, parsed);
        }

        #[test]
        fn rendering_is_a_fixed_point(report in arb_report()) {
            let once = render_canonical(&report);
            let twice = render_canonical(&parse_report(&once).report.unwrap());
            prop_assert_eq!(once, twice);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn parser_is_total_on_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..600)) {
            let text = String::from_utf8_lossy(&bytes);
            let outcome = parse_report(&text);
            prop_assert_eq!(outcome.kind == ResponseKind::Refusal, classify_response(&text) == ResponseKind::Refusal);
        }

        #[test]
        fn parser_is_total_on_structured_noise(text in line_soup()) {
            let outcome = parse_report(&text);
            if outcome.kind == ResponseKind::Report {
                prop_assert!(outcome.report.is_some());
                prop_assert!(outcome.failures.is_empty());
                prop_assert_eq!(classify_response(&text), ResponseKind::Report);
            }
        }
    }
}
