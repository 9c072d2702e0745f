//! Gaussian baseline: three whole-graph statistics, each modelled as an
//! independent univariate Gaussian fitted to past observations.
//!
//! The p-value is the product of the lower tails `P(X_i <= x_i)`, so graphs
//! with unusually *high* statistics are never flagged.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::{same_universe, LabeledGraph};
use crate::linalg::SymmetricMatrix;
use crate::model::GbterParams;

const SPECTRAL_TOL: f64 = 1e-8;
const SPECTRAL_MAX_ITERS: usize = 10_000;

/// Average degree, average clustering coefficient, residual spectral norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineStats {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl BaselineStats {
    fn as_array(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }
}

/// Local clustering coefficient of node `i`; 0 below degree 2.
pub fn clustering_coefficient(adjacency: &[Vec<usize>], i: usize) -> f64 {
    let nbrs = &adjacency[i];
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let mut closed = 0usize;
    for (a, &u) in nbrs.iter().enumerate() {
        for &v in &nbrs[a + 1..] {
            if adjacency[u].binary_search(&v).is_ok() {
                closed += 1;
            }
        }
    }
    closed as f64 / (d * (d - 1) / 2) as f64
}

pub fn average_clustering(adjacency: &[Vec<usize>]) -> f64 {
    if adjacency.is_empty() {
        return 0.0;
    }
    let total: f64 = (0..adjacency.len()).map(|i| clustering_coefficient(adjacency, i)).sum();
    total / adjacency.len() as f64
}

/// Statistics of a graph given as sorted adjacency lists against `expected`.
pub fn baseline_stats_with(adjacency: &[Vec<usize>], expected: &SymmetricMatrix) -> BaselineStats {
    let n = adjacency.len();
    let degree_sum: usize = adjacency.iter().map(Vec::len).sum();
    let x1 = if n == 0 { 0.0 } else { degree_sum as f64 / n as f64 };
    let mut residual = expected.clone();
    for i in 0..n {
        for j in 0..n {
            residual.set(i, j, -expected.get(i, j));
        }
        for &j in &adjacency[i] {
            residual.set(i, j, 1.0 - expected.get(i, j));
        }
    }
    BaselineStats {
        x1,
        x2: average_clustering(adjacency),
        x3: residual.spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITERS),
    }
}

/// `(X1, X2, X3)` of `g`, with the residual taken against the model's
/// expected adjacency matrix.
pub fn baseline_stats(g: &LabeledGraph, params: &GbterParams) -> Result<BaselineStats> {
    if !same_universe(params.universe(), g.universe()) {
        return Err(Error::UniverseMismatch);
    }
    let adj: Vec<Vec<usize>> = (0..g.node_count())
        .map(|i| g.neighbors(i).expect("in range").to_vec())
        .collect();
    Ok(baseline_stats_with(&adj, &params.expected_adjacency()))
}

/// Running mean and variance of the three statistics (Welford).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianBaselineState {
    count: usize,
    mean: [f64; 3],
    m2: [f64; 3],
}

impl GaussianBaselineState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, stats: &BaselineStats) {
        self.count += 1;
        let n = self.count as f64;
        for (k, x) in stats.as_array().into_iter().enumerate() {
            let delta = x - self.mean[k];
            self.mean[k] += delta / n;
            self.m2[k] += delta * (x - self.mean[k]);
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> [f64; 3] {
        self.mean
    }

    /// Sample standard deviations; `None` until two observations exist.
    pub fn std_dev(&self) -> Option<[f64; 3]> {
        if self.count < 2 {
            return None;
        }
        let denom = (self.count - 1) as f64;
        Some(self.m2.map(|m| (m.max(0.0) / denom).sqrt()))
    }

    pub fn pvalue(&self, stats: &BaselineStats) -> Result<f64> {
        let [x1, x2, x3] = stats.as_array();
        baseline_pvalue(self, x1, x2, x3)
    }
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `Π Φ((x_i - μ_i) / σ_i)`.
pub fn baseline_pvalue(state: &GaussianBaselineState, x1: f64, x2: f64, x3: f64) -> Result<f64> {
    let sigma = state.std_dev().ok_or_else(|| {
        Error::invalid(format!(
            "baseline needs at least 2 observations, has {}",
            state.count
        ))
    })?;
    let mut pvalue = 1.0;
    for (k, x) in [x1, x2, x3].into_iter().enumerate() {
        if sigma[k] == 0.0 {
            return Err(Error::ZeroVariance(k + 1));
        }
        pvalue *= standard_normal_cdf((x - state.mean[k]) / sigma[k]);
    }
    Ok(pvalue)
}
