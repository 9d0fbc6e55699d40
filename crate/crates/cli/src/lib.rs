//! Command-line and HTTP front ends for the litqa pipelines.

pub mod config;
pub mod engine;
pub mod service;

pub use config::{Config, ScorerKind, ENDPOINT_ENV};
pub use engine::{AnswerRecord, CliError, Engine, RetrieveRecord};
