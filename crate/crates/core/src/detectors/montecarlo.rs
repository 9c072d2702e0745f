//! Rank p-values against scores of graphs sampled from the model.

use rand::Rng;

use super::LogProb;
use crate::graph::LabeledGraph;
use crate::model::{GbterParams, GraphSampler};

/// `(#{s <= observed} + 1) / (M + 1)` for an already sorted sample, with
/// near-ties counted as ties.
pub fn rank_pvalue(sorted: &[LogProb], observed: LogProb) -> f64 {
    let at_most = sorted.partition_point(|&s| s.at_most(observed));
    (at_most + 1) as f64 / (sorted.len() + 1) as f64
}

/// Monte-Carlo p-value of `observed` with `samples` graphs drawn from `params`.
///
/// `score` maps a sampled graph to its log-probability at whichever level is
/// being tested: the whole graph, a fixed community or a fixed node.
pub fn mc_pvalue<F, R>(params: &GbterParams, observed: LogProb, samples: usize, rng: &mut R, mut score: F) -> f64
where
    F: FnMut(&LabeledGraph) -> LogProb,
    R: Rng + ?Sized,
{
    assert!(samples >= 1, "at least one sample is required");
    let sampler = GraphSampler::new(params);
    let at_most = (0..samples)
        .filter(|_| score(&sampler.sample(rng)).at_most(observed))
        .count();
    (at_most + 1) as f64 / (samples + 1) as f64
}

/// Sorted sample scores per level, filled once per step and queried for
/// every community and node.
#[derive(Debug, Clone, Default)]
pub struct SampleScores {
    pub graph: Vec<LogProb>,
    pub communities: Vec<Vec<LogProb>>,
    pub nodes: Vec<Vec<LogProb>>,
}

impl SampleScores {
    pub fn with_capacity(communities: usize, nodes: usize, samples: usize) -> Self {
        SampleScores {
            graph: Vec::with_capacity(samples),
            communities: vec![Vec::with_capacity(samples); communities],
            nodes: vec![Vec::with_capacity(samples); nodes],
        }
    }

    pub fn sort(&mut self) {
        self.graph.sort_unstable();
        self.communities.iter_mut().for_each(|v| v.sort_unstable());
        self.nodes.iter_mut().for_each(|v| v.sort_unstable());
    }
}
