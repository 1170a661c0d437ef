//! Command-line pipeline: generate a corpus, train the model, analyze layer
//! geometry and summarize the result.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod svg;

pub use config::RunConfig;
pub use error::CliError;
