//! Experiment runner for `qgraph-core`: TOML configs in, CSV and JSON out.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` also rejects NaN

pub mod config;
pub mod error;
pub mod exec;
pub mod graph_file;
pub mod output;
pub mod recipes;
pub mod run;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use exec::Pool;
pub use run::run;
