//! File formats, experiment configuration and the command runner around
//! [`lrsetd_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod images;
pub mod report;
pub mod scenarios;
pub mod tensor_file;
pub mod traffic;

pub use error::{CliError, Result};
