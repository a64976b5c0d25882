//! Run configuration, dispatch and deterministic result emission for the

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! `decohere` command-line tool.

pub mod commands;
pub mod config;
pub mod envelope;

use std::path::Path;

pub use config::{Command, Format, Invocation, RunConfig, Value};
pub use envelope::{write_atomic, Column, ResultEnvelope, Series, TOOL_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid parameter `{key}`: {message}")]
    Param { key: String, message: String },
    #[error(transparent)]
    Module(#[from] decohere_core::Error),
    #[error("io: {0}")]
    Io(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn param(key: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Param { key: key.into(), message: message.into() }
    }

    /// 2 for configuration problems, 3 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Param { .. } => 2,
            _ => 3,
        }
    }
}

pub fn run(config: &RunConfig) -> Result<ResultEnvelope, CliError> {
    commands::dispatch(config)
}

/// Runs, renders and writes to `output_path` when set. Returns the rendered
/// text.
pub fn execute(config: &RunConfig) -> Result<String, CliError> {
    let text = run(config)?.render(config.format)?;
    if let Some(path) = &config.output_path {
        write_atomic(Path::new(path), &text)?;
    }
    Ok(text)
}

/// Resolves a config file without running it.
pub fn validate(config_text: &str) -> Result<RunConfig, CliError> {
    Invocation { config_text: Some(config_text.to_string()), ..Default::default() }.resolve()
}
