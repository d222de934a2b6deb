//! HTTP API and command-line front end for the review pipeline.

pub mod cli;
pub mod config;
pub mod http;
pub mod rate_limit;

pub use config::{ConfigError, RateLimit, ServiceConfig};
pub use http::App;
