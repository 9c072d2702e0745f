//! The multi-scale statistics detector.
//!
//! A node is scored by the joint probability of its internal degree,
//! `Binomial(|C| - 1, p)`, and its external degree, `Poisson(eps)`, taken as
//! independent. A node set is scored by the product over its members.

use statrs::function::factorial::{ln_binomial, ln_factorial};

use super::LogProb;
use crate::error::{Error, Result};
use crate::graph::{same_universe, LabeledGraph};
use crate::model::GbterParams;

/// Upper-tail mass below which the external-degree range is cut off.
const TAIL_CUTOFF: f64 = 1e-12;

pub(crate) fn ln_binomial_pmf(k: usize, trials: usize, p: f64) -> f64 {
    if k > trials {
        return f64::NEG_INFINITY;
    }
    let success = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let failure = if k == trials {
        0.0
    } else {
        (trials - k) as f64 * (-p).ln_1p()
    };
    ln_binomial(trials as u64, k as u64) + success + failure
}

pub(crate) fn ln_poisson_pmf(k: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + k as f64 * mean.ln() - ln_factorial(k as u64)
}

/// Degree model of a single node.
#[derive(Debug, Clone)]
struct NodeModel {
    /// `ln P(d_in = k)` for `k` in `0..|C|`.
    internal: Vec<f64>,
    excess: f64,
    /// `ln P(d_ex = k)` for `k` in `0..n`, renormalized when truncating.
    external: Vec<f64>,
    truncated: bool,
}

impl NodeModel {
    fn external_ln(&self, k: usize) -> f64 {
        match self.external.get(k) {
            Some(&v) => v,
            None if self.truncated => f64::NEG_INFINITY,
            None => ln_poisson_pmf(k, self.excess),
        }
    }

    fn score(&self, d_in: usize, d_ex: usize) -> LogProb {
        let internal = self.internal.get(d_in).copied().unwrap_or(f64::NEG_INFINITY);
        LogProb::new(internal + self.external_ln(d_ex))
    }
}

/// Per-node degree models of one parameter set, cached for repeated scoring.
pub struct StatisticsScorer {
    community_of: Vec<usize>,
    nodes: Vec<NodeModel>,
}

impl StatisticsScorer {
    pub fn new(params: &GbterParams, truncate_poisson: bool) -> Self {
        let n = params.node_count();
        let partition = params.partition();
        let excess = params.excess_degrees();
        let nodes = (0..n)
            .map(|i| {
                let c = partition.assignment()[i];
                let trials = partition.communities()[c].len() - 1;
                let p = params.density()[c];
                let internal = (0..=trials).map(|k| ln_binomial_pmf(k, trials, p)).collect();
                let mut external: Vec<f64> = (0..n).map(|k| ln_poisson_pmf(k, excess[i])).collect();
                if truncate_poisson {
                    let log_norm = log_sum_exp(&external);
                    external.iter_mut().for_each(|v| *v -= log_norm);
                }
                NodeModel {
                    internal,
                    excess: excess[i],
                    external,
                    truncated: truncate_poisson,
                }
            })
            .collect();
        StatisticsScorer {
            community_of: partition.assignment().to_vec(),
            nodes,
        }
    }

    /// `(d_in, d_ex)` of node `i`.
    pub fn split(&self, adjacency: &[Vec<usize>], i: usize) -> (usize, usize) {
        let home = self.community_of[i];
        let d_in = adjacency[i]
            .iter()
            .filter(|&&j| self.community_of[j] == home)
            .count();
        (d_in, adjacency[i].len() - d_in)
    }

    pub fn node_score(&self, adjacency: &[Vec<usize>], i: usize) -> LogProb {
        let (d_in, d_ex) = self.split(adjacency, i);
        self.nodes[i].score(d_in, d_ex)
    }

    pub fn node_scores(&self, adjacency: &[Vec<usize>], out: &mut [LogProb]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.node_score(adjacency, i);
        }
    }

    /// Sum of member node scores.
    pub fn subset_score(node_scores: &[LogProb], members: &[usize]) -> LogProb {
        members.iter().map(|&i| node_scores[i]).sum()
    }

    /// Exact p-value of an observed degree pair: the total probability of
    /// all pairs no more likely than it.
    ///
    /// Without truncation the external range stops where the Poisson upper
    /// tail drops below `1e-12`; that tail is counted as at least as
    /// anomalous as the observation.
    pub fn node_pvalue_exact(&self, i: usize, d_in: usize, d_ex: usize) -> f64 {
        let node = &self.nodes[i];
        let observed = node.score(d_in, d_ex);
        let last = if node.truncated {
            node.external.len() - 1
        } else {
            external_cutoff(node.excess, d_ex)
        };
        let mut pvalue = 0.0;
        for &li in &node.internal {
            for k in 0..=last {
                let joint = li + node.external_ln(k);
                if LogProb::new(joint).at_most(observed) {
                    pvalue += joint.exp();
                }
            }
        }
        if !node.truncated {
            pvalue += poisson_upper_tail(node.excess, last);
        }
        pvalue.min(1.0)
    }
}

/// Smallest `k >= max(observed, mean)` with `P(X > k) < TAIL_CUTOFF`, using the
/// geometric bound `P(X > k) <= pmf(k+1) / (1 - mean/(k+2))`.
fn external_cutoff(mean: f64, observed: usize) -> usize {
    let mut k = observed.max(mean.ceil() as usize);
    loop {
        let ratio = mean / (k + 2) as f64;
        if ratio < 1.0 {
            let bound = ln_poisson_pmf(k + 1, mean).exp() / (1.0 - ratio);
            if bound < TAIL_CUTOFF {
                return k;
            }
        }
        k += 1;
    }
}

/// `P(X > k)` by direct summation of the decreasing tail terms.
fn poisson_upper_tail(mean: f64, k: usize) -> f64 {
    let mut total = 0.0;
    let mut j = k + 1;
    loop {
        let term = ln_poisson_pmf(j, mean).exp();
        total += term;
        if term <= total * 1e-17 || term == 0.0 {
            return total;
        }
        j += 1;
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check(params: &GbterParams, g: &LabeledGraph) -> Result<Vec<Vec<usize>>> {
    if !same_universe(params.universe(), g.universe()) {
        return Err(Error::UniverseMismatch);
    }
    Ok((0..g.node_count())
        .map(|i| g.neighbors(i).expect("in range").to_vec())
        .collect())
}

/// `ln[Binomial(d_in; |C|-1, p) * Poisson(d_ex; eps)]` for node `i`.
pub fn stats_node_log_prob(params: &GbterParams, g: &LabeledGraph, i: usize, truncate_poisson: bool) -> Result<LogProb> {
    let adj = check(params, g)?;
    if i >= adj.len() {
        return Err(Error::UnknownNode(i));
    }
    Ok(StatisticsScorer::new(params, truncate_poisson).node_score(&adj, i))
}

/// Sum of node scores over `nodes`.
pub fn stats_subgraph_log_prob(
    params: &GbterParams,
    g: &LabeledGraph,
    nodes: &[usize],
    truncate_poisson: bool,
) -> Result<LogProb> {
    let adj = check(params, g)?;
    if let Some(&i) = nodes.iter().find(|&&i| i >= adj.len()) {
        return Err(Error::UnknownNode(i));
    }
    let scorer = StatisticsScorer::new(params, truncate_poisson);
    Ok(nodes.iter().map(|&i| scorer.node_score(&adj, i)).sum())
}

pub fn stats_node_pvalue_exact(params: &GbterParams, g: &LabeledGraph, i: usize, truncate_poisson: bool) -> Result<f64> {
    let adj = check(params, g)?;
    if i >= adj.len() {
        return Err(Error::UnknownNode(i));
    }
    let scorer = StatisticsScorer::new(params, truncate_poisson);
    let (d_in, d_ex) = scorer.split(&adj, i);
    Ok(scorer.node_pvalue_exact(i, d_in, d_ex))
}
