//! Multi-scale anomaly detection for sequences of node-labeled graphs.
//!
//! A generalized BTER model is fitted to past snapshots; each new snapshot is
//! scored at graph, community and node granularity with Monte-Carlo or exact
//! p-values, after which the model absorbs the snapshot.

pub mod cli;
pub mod config;
pub mod detectors;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod graph;
pub mod linalg;
pub mod model;
pub mod partition;
pub mod service;

pub use error::{Error, Result};
pub use graph::{GraphSequence, LabeledGraph, SnapshotKey, Universe, WeightedAggregate};
pub use model::GbterParams;
pub use partition::Partition;
