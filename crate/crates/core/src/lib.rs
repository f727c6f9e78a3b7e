//! Evolutionary affinity propagation (EAP).
//!
//! Exemplar-based clustering of data that evolves over discrete time steps.
//! Per-time affinity propagation subgraphs are linked by temporal smoothing
//! factors; consensus nodes act as stable cluster representatives so that
//! clusters can be tracked, and their births and deaths detected, without a
//! separate cluster-matching step.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! anything else touching the OS live in the `eap` companion crate.
//!
//! Time steps are 0-based throughout the API.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod activity;
pub mod consensus;
pub mod dataseries;
pub mod engine;
mod error;
pub mod matrix;
pub mod metrics;
pub mod similarity;
pub mod solution;
pub mod static_ap;
pub mod synthgen;
pub mod temporal;

pub use dataseries::{DatasetSeries, PreferenceMode};
pub use engine::{run_eap, EapConfig, EngineStats};
pub use error::{Error, Result};
pub use matrix::SquareMatrix;
pub use similarity::{build_similarity, set_preferences, SimilarityMatrix, SimilarityTensor};
pub use solution::{ClusteringSolution, NodeId, Track, TrackKind};
pub use static_ap::{run_ap, run_ap_series, ApConfig, ApResult};
