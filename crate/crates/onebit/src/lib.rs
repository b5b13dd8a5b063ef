//! Experiment driver for one-bit diffusion detection networks: TOML
//! configuration, parallel Monte Carlo, CSV artifacts and a validation suite
//! on top of [`onebit_core`].

use std::fmt;
use std::io;

pub mod config;
pub mod experiments;
pub mod output;
pub mod runner;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig};

#[derive(Debug)]
pub enum AppError {
    Config(ConfigError),
    Core(onebit_core::Error),
    Io(io::Error),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(e) => write!(f, "config error: {e}"),
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}

impl From<onebit_core::Error> for AppError {
    fn from(e: onebit_core::Error) -> Self {
        AppError::Core(e)
    }
}

impl From<io::Error> for AppError {
    fn from(e: io::Error) -> Self {
        AppError::Io(e)
    }
}
