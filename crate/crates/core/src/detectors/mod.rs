//! Anomaly scoring of snapshots at graph, community and node granularity.
//!
//! Two multi-scale detectors score a graph under the fitted model: the
//! probability detector uses the pairwise edge likelihood, the statistics
//! detector models each node's internal and external degree. A Gaussian
//! baseline over three whole-graph statistics serves as a reference. The
//! [`Pipeline`] runs them over a stream.

mod baseline;
mod logprob;
mod montecarlo;
mod pipeline;
mod probability;
mod report;
mod statistics;

pub use baseline::{
    average_clustering, baseline_pvalue, baseline_stats, baseline_stats_with, clustering_coefficient, BaselineStats,
    GaussianBaselineState,
};
pub use logprob::LogProb;
pub use montecarlo::{mc_pvalue, rank_pvalue, SampleScores};
pub use pipeline::{Pipeline, PipelineConfig};
pub use probability::{graph_log_prob, node_log_prob, subgraph_log_prob, ProbabilityScorer};
pub use report::{
    is_flagged, AnomalyReport, CommunityEntry, DetectorConfig, DetectorKind, NodeEntry, Thresholds,
};
pub use statistics::{stats_node_log_prob, stats_node_pvalue_exact, stats_subgraph_log_prob, StatisticsScorer};
