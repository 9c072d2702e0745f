//! The multi-scale probability detector.
//!
//! A graph's log-probability is the sum of its independent pair terms. A
//! node's log-probability covers the `n - 1` pairs it takes part in, so every
//! pair is counted twice across nodes and the graph score is half the node
//! total; the same halving scores any node subset.

use super::LogProb;
use crate::error::{Error, Result};
use crate::graph::{same_universe, LabeledGraph};
use crate::model::{EdgeProbabilityTable, GbterParams};

/// Pair terms of one parameter set, cached for repeated scoring.
///
/// Non-edge terms are summed once; scoring a graph then adds, per edge,
/// `ln P - ln(1 - P)`. Pairs with `P = 1` are counted instead of summed so no
/// `inf - inf` arises.
pub struct ProbabilityScorer {
    n: usize,
    /// `ln P - ln(1-P)`; 0 for certain pairs, `-inf` for impossible ones.
    edge_delta: Vec<f64>,
    certain: Vec<bool>,
    node_base: Vec<f64>,
    node_certain: Vec<usize>,
    graph_base: f64,
    graph_certain: usize,
}

impl ProbabilityScorer {
    pub fn new(table: &EdgeProbabilityTable) -> Self {
        let n = table.node_count();
        let mut edge_delta = vec![0.0; n * n];
        let mut certain = vec![false; n * n];
        let mut node_base = vec![0.0; n];
        let mut node_certain = vec![0; n];
        let mut graph_base = 0.0;
        let mut graph_certain = 0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let p = table.get(i, j);
                let k = i * n + j;
                if p >= 1.0 {
                    certain[k] = true;
                    node_certain[i] += 1;
                    if i < j {
                        graph_certain += 1;
                    }
                } else {
                    let non_edge = (-p).ln_1p();
                    edge_delta[k] = p.ln() - non_edge;
                    node_base[i] += non_edge;
                    if i < j {
                        graph_base += non_edge;
                    }
                }
            }
        }
        ProbabilityScorer {
            n,
            edge_delta,
            certain,
            node_base,
            node_certain,
            graph_base,
            graph_certain,
        }
    }

    pub fn from_params(params: &GbterParams) -> Self {
        ProbabilityScorer::new(&params.edge_probabilities())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Log-probability of the whole graph given its sorted adjacency lists.
    pub fn graph_score(&self, adjacency: &[Vec<usize>]) -> LogProb {
        let mut total = self.graph_base;
        let mut certain_hit = 0;
        for (i, adj) in adjacency.iter().enumerate() {
            for &j in adj.iter().filter(|&&j| j > i) {
                let k = i * self.n + j;
                if self.certain[k] {
                    certain_hit += 1;
                } else {
                    total += self.edge_delta[k];
                }
            }
        }
        if certain_hit < self.graph_certain {
            return LogProb::NEG_INFINITY;
        }
        LogProb::new(total)
    }

    pub fn node_score(&self, adjacency: &[Vec<usize>], i: usize) -> LogProb {
        let row = i * self.n;
        let mut total = self.node_base[i];
        let mut certain_hit = 0;
        for &j in &adjacency[i] {
            if self.certain[row + j] {
                certain_hit += 1;
            } else {
                total += self.edge_delta[row + j];
            }
        }
        if certain_hit < self.node_certain[i] {
            return LogProb::NEG_INFINITY;
        }
        LogProb::new(total)
    }

    pub fn node_scores(&self, adjacency: &[Vec<usize>], out: &mut [LogProb]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.node_score(adjacency, i);
        }
    }

    /// Half the summed node scores of `members`.
    pub fn subset_score(node_scores: &[LogProb], members: &[usize]) -> LogProb {
        members.iter().map(|&i| node_scores[i]).sum::<LogProb>().halve()
    }
}

fn check_universe(params: &GbterParams, g: &LabeledGraph) -> Result<()> {
    if same_universe(params.universe(), g.universe()) {
        Ok(())
    } else {
        Err(Error::UniverseMismatch)
    }
}

fn adjacency(g: &LabeledGraph) -> Vec<Vec<usize>> {
    (0..g.node_count())
        .map(|i| g.neighbors(i).expect("in range").to_vec())
        .collect()
}

/// Log-probability of `g` under the model: every edge contributes `ln P`,
/// every absent pair `ln(1 - P)`.
pub fn graph_log_prob(params: &GbterParams, g: &LabeledGraph) -> Result<LogProb> {
    check_universe(params, g)?;
    Ok(ProbabilityScorer::from_params(params).graph_score(&adjacency(g)))
}

pub fn node_log_prob(params: &GbterParams, g: &LabeledGraph, i: usize) -> Result<LogProb> {
    check_universe(params, g)?;
    if i >= g.node_count() {
        return Err(Error::UnknownNode(i));
    }
    Ok(ProbabilityScorer::from_params(params).node_score(&adjacency(g), i))
}

/// Half the node log-probabilities over `nodes`; over a whole partition the
/// community scores add up to the graph score.
pub fn subgraph_log_prob(params: &GbterParams, g: &LabeledGraph, nodes: &[usize]) -> Result<LogProb> {
    check_universe(params, g)?;
    if let Some(&i) = nodes.iter().find(|&&i| i >= g.node_count()) {
        return Err(Error::UnknownNode(i));
    }
    let scorer = ProbabilityScorer::from_params(params);
    let adj = adjacency(g);
    Ok(nodes
        .iter()
        .map(|&i| scorer.node_score(&adj, i))
        .sum::<LogProb>()
        .halve())
}
