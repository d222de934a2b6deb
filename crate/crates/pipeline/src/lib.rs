//! End-to-end review of a single proposal and batch evaluation over a corpus.

pub mod harness;
pub mod review;

pub use harness::{
    emit_cases, emit_summary, load_corpus, matched_markers, parse_corpus, CaseResult, CorpusCase,
    CorpusError, Harness, OutputFormat, RunSummary,
};
pub use review::{ReviewError, ReviewMeta, ReviewPipeline, ReviewResponse};
