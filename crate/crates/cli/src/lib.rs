//! Batch experiment runner for evolutionary affinity propagation.
//!
//! Reads temporal datasets from CSV or generates the Gaussian benchmarks,
//! clusters them with per-step affinity propagation, EAP, or EAP without
//! consensus nodes, and writes a versioned JSON result together with CSV
//! exports. The `eap` binary is a thin clap front end over [`runner`] and
//! [`report`].

pub mod config;
pub mod csv_io;
mod error;
pub mod report;
pub mod result;
pub mod runner;

pub use config::{Algorithm, DatasetSource, RunConfig};
pub use csv_io::{load_csv, read_csv, save_csv, write_csv, ColumnMapping};
pub use error::{CliError, Result};
pub use result::{validate, ResultDoc, SCHEMA_VERSION};
pub use runner::{execute, run, RunOutcome};
