//! The `ethically` command line: `serve`, `review` and `eval`.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ethically_core::guardrails::redact_for_logs;
use ethically_core::report::{render_markdown, ResponseKind};
use ethically_core::ProposalSubmission;
use ethically_gateway::mock::MOCK_MODEL_ID;
use ethically_gateway::{
    AnthropicProvider, Gateway, MockDirectory, MockProvider, Provider, SharedProvider,
};
use ethically_pipeline::{
    emit_cases, emit_summary, load_corpus, Harness, OutputFormat, ReviewError, ReviewPipeline,
    ReviewResponse, RunSummary,
};
use tracing_subscriber::EnvFilter;

use crate::config::ServiceConfig;
use crate::http::App;

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED_CASES: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const REFUSAL: i32 = 3;
    pub const MALFORMED: i32 = 4;
    pub const PROVIDER: i32 = 5;
}

pub const DEFAULT_MOCK_DIR: &str = "data/mocks/perfect";

pub const LIVE_WARNING: &str = "warning: --live sends every corpus proposal to the paid model API. \
Each run costs money and the model's answers vary between runs, so detection rates are not reproducible.";

#[derive(Debug, Parser)]
#[command(
    name = "ethically",
    version,
    about = "AI-assisted research ethics review"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Review a single proposal file.
    Review(ReviewArgs),
    /// Run the evaluation harness over a corpus.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Answer every review from this mock script instead of the live API.
    #[arg(long)]
    pub mock: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReviewOutput {
    Json,
    Markdown,
}

#[derive(Debug, Args)]
pub struct ReviewArgs {
    /// Proposal text file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Field of research.
    #[arg(long)]
    pub field: String,
    /// Country or region where the research takes place.
    #[arg(long)]
    pub region: String,
    /// Optional supplementary materials file.
    #[arg(long, value_name = "FILE")]
    pub supplementary: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "markdown")]
    pub out: ReviewOutput,
    /// Mock script (`.txt` reply or `.json` step list) instead of the live API.
    #[arg(long, value_name = "FILE")]
    pub mock: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// JSON Lines corpus.
    #[arg(long, value_name = "FILE")]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u16).range(1..))]
    pub parallel: u16,
    /// Directory of per-case mock scripts.
    #[arg(long, value_name = "DIR", conflicts_with = "live")]
    pub mock: Option<PathBuf>,
    /// Call the live model API (needs ETHICALLY_API_KEY).
    #[arg(long)]
    pub live: bool,
    /// Summary format: json, csv or markdown.
    #[arg(long, default_value = "json")]
    pub format: OutputFormat,
    /// Also print one row per case after the summary.
    #[arg(long)]
    pub per_case: bool,
}

pub fn init_logging(default_directive: &str) {
    let filter =
        EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default_directive));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_target(false)
        .try_init();
}

fn load_config() -> Result<ServiceConfig, i32> {
    ServiceConfig::from_env().map_err(|e| {
        eprintln!("error: {e}");
        exit::USAGE
    })
}

fn live_provider(config: &ServiceConfig) -> Result<Arc<dyn Provider>, i32> {
    match config.anthropic() {
        Some(cfg) => Ok(Arc::new(AnthropicProvider::new(cfg))),
        None => {
            eprintln!("error: ETHICALLY_API_KEY is not set; pass --mock to run offline");
            Err(exit::USAGE)
        }
    }
}

fn mock_provider(path: &Path) -> Result<Arc<dyn Provider>, i32> {
    MockProvider::from_file(path)
        .map(|m| Arc::new(m) as Arc<dyn Provider>)
        .map_err(|e| {
            eprintln!("error: {}", e.detail);
            exit::USAGE
        })
}

pub async fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Serve(args) => serve(args).await,
        Command::Review(args) => review(args).await,
        Command::Eval(args) => eval(args).await,
    };
    result.unwrap_or_else(|code| code)
}

async fn serve(args: ServeArgs) -> Result<i32, i32> {
    let mut config = load_config()?;
    let provider = match &args.mock {
        Some(path) => {
            config.model_id = MOCK_MODEL_ID.to_string();
            mock_provider(path)?
        }
        None => live_provider(&config)?,
    };
    let app = App::new(&config, provider).map_err(|e| {
        eprintln!("error: {e}");
        exit::USAGE
    })?;
    let listener = tokio::net::TcpListener::bind(config.bind_address)
        .await
        .map_err(|e| {
            eprintln!("error: cannot bind {}: {e}", config.bind_address);
            exit::USAGE
        })?;
    tracing::info!(address = %config.bind_address, model_id = %config.model_id, "listening");
    axum::serve(
        listener,
        app.router()
            .into_make_service_with_connect_info::<SocketAddr>(),
    )
    .with_graceful_shutdown(async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
    .map_err(|e| {
        eprintln!("error: server stopped: {e}");
        exit::PROVIDER
    })?;
    Ok(exit::OK)
}

fn read_text(path: &Path, what: &str) -> Result<String, i32> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {what} {}: {e}", path.display());
        exit::USAGE
    })
}

fn print_review(response: &ReviewResponse, format: ReviewOutput) {
    let mut out = std::io::stdout().lock();
    let text = match format {
        ReviewOutput::Json => {
            serde_json::to_string_pretty(response).expect("response serializes") + "\n"
        }
        ReviewOutput::Markdown => match &response.report {
            Some(report) if response.kind == ResponseKind::Report => {
                let mut text = render_markdown(report);
                for notice in &response.notices {
                    text.push_str(&format!("\n> {notice}\n"));
                }
                text
            }
            _ => {
                let mut text = response.raw_text.trim_end().to_string();
                text.push('\n');
                text
            }
        },
    };
    let _ = out.write_all(text.as_bytes());
}

async fn review(args: ReviewArgs) -> Result<i32, i32> {
    let config = load_config()?;
    let proposal = read_text(&args.input, "proposal")?;
    let mut submission = ProposalSubmission::new(&args.field, &args.region, proposal)
        // Running the command on a local file stands in for the web form's
        // confirmation that identifying details were removed.
        .with_pii_confirmed(true);
    if let Some(path) = &args.supplementary {
        submission = submission.with_supplementary(read_text(path, "supplementary materials")?);
    }

    let (provider, model_id) = match &args.mock {
        Some(path) => (mock_provider(path)?, MOCK_MODEL_ID.to_string()),
        None => (live_provider(&config)?, config.model_id.clone()),
    };
    let engine = config.prompt_engine().map_err(|e| {
        eprintln!("error: {e}");
        exit::USAGE
    })?;
    let pipeline = ReviewPipeline::new(
        engine,
        Gateway::new(provider).with_policy(config.retry),
        model_id,
    )
    .with_precheck(config.precheck_enabled);

    let diagnose = |message: String| eprintln!("error: {}", redact_for_logs(&message, &submission));
    match pipeline.review(&submission).await {
        Ok(response) => {
            for advisory in &response.advisories {
                eprintln!("note: {advisory}");
            }
            for warning in response.warnings.iter().chain(&response.failures) {
                eprintln!("warning: {}", redact_for_logs(warning, &submission));
            }
            print_review(&response, args.out);
            Ok(match response.kind {
                ResponseKind::Report => exit::OK,
                ResponseKind::Refusal => exit::REFUSAL,
                ResponseKind::Malformed => {
                    eprintln!("error: the model's answer could not be parsed as a report; raw text printed above");
                    exit::MALFORMED
                }
            })
        }
        Err(ReviewError::Validation(failures)) => {
            failures.iter().for_each(|f| diagnose(f.message()));
            Err(exit::USAGE)
        }
        Err(ReviewError::Guardrail(denials)) => {
            denials.iter().for_each(|d| diagnose(d.to_string()));
            Err(exit::USAGE)
        }
        Err(ReviewError::Prompt(e)) => {
            diagnose(e.to_string());
            Err(exit::USAGE)
        }
        Err(ReviewError::Provider(failure)) => {
            diagnose(failure.to_string());
            if failure.error.retryable {
                eprintln!("hint: the provider may be busy; try again in a few minutes");
            }
            Err(exit::PROVIDER)
        }
    }
}

async fn eval(args: EvalArgs) -> Result<i32, i32> {
    let config = load_config()?;
    let cases = load_corpus(&args.corpus).map_err(|e| {
        eprintln!("error: {e}");
        exit::USAGE
    })?;
    let engine = config.prompt_engine().map_err(|e| {
        eprintln!("error: {e}");
        exit::USAGE
    })?;

    let harness_for = |model_id: String| {
        Harness::new(engine.clone(), model_id)
            .with_parallelism(usize::from(args.parallel))
            .with_policy(config.retry)
    };
    let results = if args.live {
        let provider = live_provider(&config)?;
        eprintln!("{LIVE_WARNING}");
        harness_for(config.model_id.clone())
            .run_corpus(&cases, &SharedProvider(provider))
            .await
    } else {
        let dir = args
            .mock
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_MOCK_DIR));
        if !dir.is_dir() {
            eprintln!("error: mock directory {} does not exist", dir.display());
            return Err(exit::USAGE);
        }
        harness_for(MOCK_MODEL_ID.to_string())
            .run_corpus(&cases, &MockDirectory::new(dir))
            .await
    };

    let summary = RunSummary::from_results(&results);
    let mut text = emit_summary(&summary, args.format);
    if args.per_case {
        text.push_str(&emit_cases(&results, args.format));
    }
    let _ = std::io::stdout().lock().write_all(text.as_bytes());

    for result in results.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "case {} failed: {}",
            result.id,
            result.error.as_deref().unwrap_or_default()
        );
    }
    Ok(if summary.failed > 0 {
        exit::FAILED_CASES
    } else {
        exit::OK
    })
}
