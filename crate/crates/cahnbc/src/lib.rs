//! File formats, configuration and the command-line driver around
//! `cahnbc-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod snapshot;

pub use config::Config;
pub use error::{CliError, Result};
