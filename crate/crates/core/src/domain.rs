//! Shared domain types: submissions, reports, the principle catalogs and the
//! risk rubric.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on `proposal_text`, in characters.
pub const DEFAULT_MAX_PROPOSAL_CHARS: usize = 60_000;

/// Phrase every report disclaimer must contain.
pub const DISCLAIMER_KEY_PHRASE: &str = "cannot replace human ethical oversight";

/// Canonical AI-limitations disclaimer that opens every report.
pub const DISCLAIMER_TEXT: &str = "DISCLAIMER: This ethics review is generated by an artificial intelligence system for research and educational purposes only. While this analysis applies established ethical frameworks and guidelines, it cannot replace human ethical oversight, institutional review board (IRB) approval, or professional ethics consultation. AI-generated reviews may miss nuanced cultural, contextual, or novel ethical considerations that require human judgment. This report should be used as a supplementary tool to support, not substitute for, proper human ethics review processes.";

/// Caution banner shown alongside every review.
pub const CAUTION_NOTICE: &str = "CAUTION: EthicAlly is a research app and still under development. It can make mistakes. Always seek ethical advice from your institutional research ethics committee or equivalent.";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("risk score {0} is outside the 1-5 rubric")]
    OutOfRangeRiskScore(i64),
}

/// A researcher's request for an ethics review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposalSubmission {
    pub field_of_research: String,
    pub country_region: String,
    pub proposal_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supplementary_materials: Option<String>,
    #[serde(default)]
    pub pii_confirmed: bool,
}

impl ProposalSubmission {
    pub fn new(
        field_of_research: impl Into<String>,
        country_region: impl Into<String>,
        proposal_text: impl Into<String>,
    ) -> Self {
        Self {
            field_of_research: field_of_research.into(),
            country_region: country_region.into(),
            proposal_text: proposal_text.into(),
            supplementary_materials: None,
            pii_confirmed: false,
        }
    }

    pub fn with_supplementary(mut self, materials: impl Into<String>) -> Self {
        self.supplementary_materials = Some(materials.into());
        self
    }

    pub fn with_pii_confirmed(mut self, confirmed: bool) -> Self {
        self.pii_confirmed = confirmed;
        self
    }

    /// Non-empty supplementary materials, if any were supplied.
    pub fn supplementary(&self) -> Option<&str> {
        self.supplementary_materials
            .as_deref()
            .filter(|s| !s.trim().is_empty())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionLimits {
    pub max_proposal_chars: usize,
}

impl Default for SubmissionLimits {
    fn default() -> Self {
        Self {
            max_proposal_chars: DEFAULT_MAX_PROPOSAL_CHARS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmissionField {
    FieldOfResearch,
    CountryRegion,
    ProposalText,
}

impl SubmissionField {
    pub fn as_str(self) -> &'static str {
        match self {
            SubmissionField::FieldOfResearch => "field_of_research",
            SubmissionField::CountryRegion => "country_region",
            SubmissionField::ProposalText => "proposal_text",
        }
    }
}

/// One violated submission invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationFailure {
    EmptyField(SubmissionField),
    ProposalTooLong { length: usize, max: usize },
}

impl ValidationFailure {
    pub fn code(&self) -> &'static str {
        match self {
            ValidationFailure::EmptyField(_) => "empty_field",
            ValidationFailure::ProposalTooLong { .. } => "proposal_too_long",
        }
    }

    pub fn field(&self) -> SubmissionField {
        match self {
            ValidationFailure::EmptyField(field) => *field,
            ValidationFailure::ProposalTooLong { .. } => SubmissionField::ProposalText,
        }
    }

    pub fn message(&self) -> String {
        match self {
            ValidationFailure::EmptyField(field) => {
                format!("{} must not be empty", field.as_str())
            }
            ValidationFailure::ProposalTooLong { length, max } => {
                format!("proposal_text is {length} characters long; the maximum is {max}")
            }
        }
    }
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message())
    }
}

impl Serialize for ValidationFailure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("ValidationFailure", 3)?;
        st.serialize_field("code", self.code())?;
        st.serialize_field("field", self.field().as_str())?;
        st.serialize_field("message", &self.message())?;
        st.end()
    }
}

/// Checks every submission invariant and reports each violation, in field order.
pub fn validate_submission(
    submission: &ProposalSubmission,
    limits: &SubmissionLimits,
) -> Vec<ValidationFailure> {
    let mut failures = Vec::new();
    let required = [
        (
            SubmissionField::FieldOfResearch,
            &submission.field_of_research,
        ),
        (SubmissionField::CountryRegion, &submission.country_region),
        (SubmissionField::ProposalText, &submission.proposal_text),
    ];
    for (field, value) in required {
        if value.trim().is_empty() {
            failures.push(ValidationFailure::EmptyField(field));
        }
    }
    let length = submission.proposal_text.chars().count();
    if length > limits.max_proposal_chars {
        failures.push(ValidationFailure::ProposalTooLong {
            length,
            max: limits.max_proposal_chars,
        });
    }
    failures
}

const RISK_LABELS: [&str; 5] = [
    "Low Risk",
    "Low-Moderate Risk",
    "Moderate Risk",
    "Moderate-High Risk",
    "High Risk",
];

const RISK_DESCRIPTIONS: [&str; 5] = [
    "Minimal ethical concerns, standard protections adequate",
    "Some concerns but easily addressable",
    "Significant issues requiring careful attention",
    "Serious ethical concerns, major revisions needed",
    "Fundamental ethical problems, research may not be approvable without substantial redesign",
];

/// Rubric label for a risk value.
pub fn risk_label(value: i64) -> Result<&'static str, DomainError> {
    if (1..=5).contains(&value) {
        Ok(RISK_LABELS[(value - 1) as usize])
    } else {
        Err(DomainError::OutOfRangeRiskScore(value))
    }
}

/// Rubric description for a risk value.
pub fn risk_description(value: i64) -> Result<&'static str, DomainError> {
    risk_label(value).map(|_| RISK_DESCRIPTIONS[(value - 1) as usize])
}

/// Matches `label` against the rubric, ignoring case and the hyphen/space
/// variation models tend to produce ("Low Moderate Risk").
pub fn canonical_risk_label(label: &str) -> Option<&'static str> {
    let squash = |s: &str| {
        s.chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect::<String>()
    };
    let wanted = squash(label);
    RISK_LABELS.iter().copied().find(|l| squash(l) == wanted)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskScore {
    pub value: u8,
    pub label: String,
    pub justification: String,
}

impl RiskScore {
    /// Builds a score whose label is the rubric label for `value`.
    pub fn new(value: i64, justification: impl Into<String>) -> Result<Self, DomainError> {
        let label = risk_label(value)?;
        Ok(Self {
            value: value as u8,
            label: label.to_string(),
            justification: justification.into(),
        })
    }

    pub fn label_matches_value(&self) -> bool {
        risk_label(i64::from(self.value)).is_ok_and(|l| l == self.label)
    }
}

const ESSENTIAL_PRINCIPLES: [&str; 6] = [
    "Informed Consent",
    "Beneficence and non-maleficence",
    "Respect for Persons",
    "Confidentiality",
    "Conflict of Interest",
    "Social Justice",
];

const CONTEXTUAL_PRINCIPLES: [&str; 6] = [
    "Reflexivity",
    "Cultural sensitivity",
    "Intellectual Property",
    "Recognition vs. Anonymity",
    "Trauma-informed Approaches",
    "Political Economy Considerations",
];

/// The essential principles every proposal must satisfy and the contextual
/// principles applied where relevant. Fixed at compile time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrincipleCatalog {
    essential: &'static [&'static str; 6],
    contextual: &'static [&'static str; 6],
}

impl PrincipleCatalog {
    pub const fn standard() -> Self {
        Self {
            essential: &ESSENTIAL_PRINCIPLES,
            contextual: &CONTEXTUAL_PRINCIPLES,
        }
    }

    pub fn essential(&self) -> &'static [&'static str] {
        self.essential
    }

    pub fn contextual(&self) -> &'static [&'static str] {
        self.contextual
    }

    pub fn all(&self) -> impl Iterator<Item = &'static str> {
        self.essential.iter().chain(self.contextual.iter()).copied()
    }
}

impl Default for PrincipleCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Framework {
    NurembergCode,
    BelmontReport,
    DeclarationOfHelsinki,
    DisciplineSpecific,
    LegalRegulatory,
}

impl Framework {
    pub const ALL: [Framework; 5] = [
        Framework::NurembergCode,
        Framework::BelmontReport,
        Framework::DeclarationOfHelsinki,
        Framework::DisciplineSpecific,
        Framework::LegalRegulatory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Framework::NurembergCode => "Nuremberg Code",
            Framework::BelmontReport => "Belmont Report",
            Framework::DeclarationOfHelsinki => "Declaration of Helsinki",
            Framework::DisciplineSpecific => "Discipline-Specific Standards",
            Framework::LegalRegulatory => "Legal and Regulatory Compliance",
        }
    }

    /// Whether this is one of the named ethics codes (as opposed to the
    /// discipline and legal checklists).
    pub fn is_ethics_code(self) -> bool {
        matches!(
            self,
            Framework::NurembergCode | Framework::BelmontReport | Framework::DeclarationOfHelsinki
        )
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComplianceStatus {
    Adequate,
    Partial,
    Concern,
    MajorConcern,
    MajorViolation,
    NotApplicable,
}

impl ComplianceStatus {
    pub const ALL: [ComplianceStatus; 6] = [
        ComplianceStatus::Adequate,
        ComplianceStatus::Partial,
        ComplianceStatus::Concern,
        ComplianceStatus::MajorConcern,
        ComplianceStatus::MajorViolation,
        ComplianceStatus::NotApplicable,
    ];

    /// Capitalized marker used in report text.
    pub fn marker(self) -> &'static str {
        match self {
            ComplianceStatus::Adequate => "ADEQUATE",
            ComplianceStatus::Partial => "PARTIAL",
            ComplianceStatus::Concern => "CONCERN",
            ComplianceStatus::MajorConcern => "MAJOR CONCERN",
            ComplianceStatus::MajorViolation => "MAJOR VIOLATION",
            ComplianceStatus::NotApplicable => "NOT APPLICABLE",
        }
    }

    pub fn from_marker(marker: &str) -> Option<Self> {
        let normalized = marker
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_ascii_uppercase();
        match normalized.as_str() {
            "ADEQUATE" => Some(ComplianceStatus::Adequate),
            "PARTIAL" => Some(ComplianceStatus::Partial),
            "CONCERN" => Some(ComplianceStatus::Concern),
            "MAJOR CONCERN" => Some(ComplianceStatus::MajorConcern),
            "MAJOR VIOLATION" => Some(ComplianceStatus::MajorViolation),
            "NOT APPLICABLE" | "N/A" => Some(ComplianceStatus::NotApplicable),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplianceFinding {
    pub framework: Framework,
    pub status: ComplianceStatus,
    pub detail: String,
}

/// Issue priority tier. Ordered so that `High > Moderate > Minor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Priority {
    Minor,
    Moderate,
    High,
}

impl Priority {
    /// Tier heading used in report text.
    pub fn heading(self) -> &'static str {
        match self {
            Priority::High => "High Priority Issues",
            Priority::Moderate => "Moderate Concerns",
            Priority::Minor => "Minor Considerations",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EthicalIssue {
    pub priority: Priority,
    pub title: String,
    pub problem: String,
    pub recommendations: Vec<String>,
}

/// The structured ethics report.
///
/// `raw_text` holds the provider output the report was parsed from. It is
/// carried beside the structure, not inside its serialized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EthicsReport {
    pub disclaimer: String,
    pub summary_assessment: String,
    pub compliance: Vec<ComplianceFinding>,
    pub issues: Vec<EthicalIssue>,
    pub risk: RiskScore,
    pub supplementary_assessment: Option<String>,
    #[serde(skip)]
    pub raw_text: String,
}

impl EthicsReport {
    /// Equality over everything except `raw_text`.
    pub fn same_structure(&self, other: &EthicsReport) -> bool {
        self.disclaimer == other.disclaimer
            && self.summary_assessment == other.summary_assessment
            && self.compliance == other.compliance
            && self.issues == other.issues
            && self.risk == other.risk
            && self.supplementary_assessment == other.supplementary_assessment
    }

    pub fn has_disclaimer(&self) -> bool {
        self.disclaimer.contains(DISCLAIMER_KEY_PHRASE)
    }

    pub fn issues_at_least(&self, priority: Priority) -> impl Iterator<Item = &EthicalIssue> {
        self.issues.iter().filter(move |i| i.priority >= priority)
    }
}
