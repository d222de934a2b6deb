//! Scripted providers for offline runs and tests.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use serde::Deserialize;

use crate::provider::{
    Completion, Provider, ProviderError, ProviderErrorKind, ProviderRequest, ProviderSource,
};

pub const MOCK_MODEL_ID: &str = "mock-model";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockStep {
    Reply(String),
    Fail(ProviderErrorKind),
    /// Never completes; exercises the gateway timeout.
    Hang,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum StepFile {
    Reply(String),
    Fail(ProviderErrorKind),
    Hang,
}

/// Plays back a fixed list of steps. Once the list is exhausted the last step
/// repeats.
pub struct MockProvider {
    steps: Vec<MockStep>,
    cursor: Mutex<usize>,
    delay: Option<Duration>,
    model_id: String,
    calls: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

impl MockProvider {
    pub fn new(steps: Vec<MockStep>) -> Self {
        assert!(!steps.is_empty(), "mock script needs at least one step");
        Self {
            steps,
            cursor: Mutex::new(0),
            delay: None,
            model_id: MOCK_MODEL_ID.to_string(),
            calls: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        }
    }

    pub fn replying(text: impl Into<String>) -> Self {
        Self::new(vec![MockStep::Reply(text.into())])
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    pub fn with_model_id(mut self, model_id: impl Into<String>) -> Self {
        self.model_id = model_id.into();
        self
    }

    /// Loads a script file. `.json` files hold a list of steps such as
    /// `[{"fail": "overloaded"}, "hang", {"reply": "..."}]`; any other file is a
    /// single reply.
    pub fn from_file(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ProviderError::transport(format!("cannot read mock script {}: {e}", path.display()))
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            let steps: Vec<StepFile> = serde_json::from_str(&text).map_err(|e| {
                ProviderError::transport(format!("invalid mock script {}: {e}", path.display()))
            })?;
            if steps.is_empty() {
                return Err(ProviderError::transport(format!(
                    "mock script {} is empty",
                    path.display()
                )));
            }
            Ok(Self::new(
                steps
                    .into_iter()
                    .map(|s| match s {
                        StepFile::Reply(text) => MockStep::Reply(text),
                        StepFile::Fail(kind) => MockStep::Fail(kind),
                        StepFile::Hang => MockStep::Hang,
                    })
                    .collect(),
            ))
        } else {
            Ok(Self::replying(text))
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Highest number of overlapping `complete` calls observed.
    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    fn next_step(&self) -> MockStep {
        let mut cursor = self.cursor.lock().unwrap();
        let step = self.steps[(*cursor).min(self.steps.len() - 1)].clone();
        *cursor += 1;
        step
    }
}

struct InFlight<'a>(&'a AtomicUsize);

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::SeqCst);
    }
}

#[async_trait]
impl Provider for MockProvider {
    async fn complete(&self, _request: &ProviderRequest) -> Result<Completion, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        let _guard = InFlight(&self.in_flight);

        let step = self.next_step();
        if let Some(delay) = self.delay {
            tokio::time::sleep(delay).await;
        }
        match step {
            MockStep::Reply(raw_text) => Ok(Completion {
                raw_text,
                model_id: self.model_id.clone(),
            }),
            MockStep::Fail(kind) => Err(ProviderError::new(kind, "scripted failure")),
            MockStep::Hang => std::future::pending().await,
        }
    }
}

/// A directory of per-case mock scripts: `<case_id>.txt` or
/// `<case_id>.json`, falling back to `default.txt` / `default.json`.
pub struct MockDirectory {
    root: PathBuf,
}

impl MockDirectory {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    fn script_for(&self, case_id: &str) -> Option<PathBuf> {
        [case_id, "default"]
            .iter()
            .flat_map(|stem| ["json", "txt"].map(|ext| self.root.join(format!("{stem}.{ext}"))))
            .find(|p| p.is_file())
    }
}

impl ProviderSource for MockDirectory {
    fn provider_for(&self, case_id: &str) -> Result<Arc<dyn Provider>, ProviderError> {
        let path = self.script_for(case_id).ok_or_else(|| {
            ProviderError::new(
                ProviderErrorKind::BadRequest,
                format!(
                    "no mock script for case '{case_id}' in {}",
                    self.root.display()
                ),
            )
        })?;
        Ok(Arc::new(MockProvider::from_file(&path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request() -> ProviderRequest {
        ProviderRequest::new("s", "u", "m", "v")
    }

    #[tokio::test]
    async fn script_repeats_last_step() {
        let mock = MockProvider::new(vec![
            MockStep::Fail(ProviderErrorKind::Overloaded),
            MockStep::Reply("ok".into()),
        ]);
        assert_eq!(
            mock.complete(&request()).await.unwrap_err().kind,
            ProviderErrorKind::Overloaded
        );
        for _ in 0..3 {
            assert_eq!(mock.complete(&request()).await.unwrap().raw_text, "ok");
        }
        assert_eq!(mock.calls(), 4);
    }

    #[tokio::test]
    async fn loads_scripts_from_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "plain reply").unwrap();
        std::fs::write(
            dir.path().join("b.json"),
            r#"[{"fail": "timeout"}, {"reply": "second"}]"#,
        )
        .unwrap();
        std::fs::write(dir.path().join("default.txt"), "fallback").unwrap();
        let source = MockDirectory::new(dir.path());

        let a = source.provider_for("a").unwrap();
        assert_eq!(
            a.complete(&request()).await.unwrap().raw_text,
            "plain reply"
        );
        let b = source.provider_for("b").unwrap();
        assert!(b.complete(&request()).await.is_err());
        assert_eq!(b.complete(&request()).await.unwrap().raw_text, "second");
        let other = source.provider_for("zzz").unwrap();
        assert_eq!(
            other.complete(&request()).await.unwrap().raw_text,
            "fallback"
        );
    }

    #[test]
    fn missing_script_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(MockDirectory::new(dir.path()).provider_for("x").is_err());
        std::fs::write(dir.path().join("bad.json"), "[]").unwrap();
        assert!(MockDirectory::new(dir.path()).provider_for("bad").is_err());
    }
}
