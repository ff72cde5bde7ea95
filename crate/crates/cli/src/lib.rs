//! Command-line front end: spectral-datum documents in, structured reports out.

pub mod commands;
pub mod document;
pub mod error;
pub mod report;

pub use error::CliError;
