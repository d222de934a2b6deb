//! Core types and pure logic for the EthicAlly research-ethics reviewer:
//! the report domain model, system-prompt assembly, report parsing and
//! guardrails.

pub mod domain;
pub mod guardrails;
pub mod prompt;
pub mod report;

pub use domain::{
    ComplianceFinding, ComplianceStatus, EthicalIssue, EthicsReport, Framework, Priority,
    ProposalSubmission, RiskScore, SubmissionLimits, ValidationFailure,
};
pub use prompt::{AssembledPrompt, PromptConfig, PromptEngine, PromptError, PromptVariant};
pub use report::{parse_report, ParseOutcome, ResponseKind};
