//! Model provider abstraction for EthicAlly: the [`Provider`] trait, a
//! retrying [`Gateway`], scripted mocks and the Anthropic HTTP client.

pub mod anthropic;
pub mod mock;
pub mod provider;
pub mod retry;

pub use anthropic::{AnthropicConfig, AnthropicProvider, ApiKey};
pub use mock::{MockDirectory, MockProvider, MockStep};
pub use provider::{
    Completion, Provider, ProviderError, ProviderErrorKind, ProviderRequest, ProviderSource,
    SharedProvider,
};
pub use retry::{Gateway, GatewayFailure, ProviderResult, RecordingSleeper, RetryPolicy, Sleeper};
