//! File formats, parallel Monte Carlo experiments and the command-line
//! front end built on `netfdm-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod mc;

pub use error::{CliError, CliResult};
