//! Harness behind the `hlorentz` binary: configuration files, seeded
//! corpora, the verify runners and their CSV/JSON reports.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod error;
pub mod report;
pub mod runs;

pub use config::RunConfig;
pub use corpus::{CorpusSpec, ValueDistribution};
pub use error::CliError;
pub use report::{Bracket, ItemResult, RunReport};
pub use runs::{run_verify, run_verify_on, Check, VerifyParams};

pub type Result<T> = std::result::Result<T, CliError>;
