//! The generalized BTER model.
//!
//! Each community is an Erdős-Rényi block with its own density. Whatever
//! expected degree the block does not supply (the excess degree) is added by a
//! Chung-Lu stage over all pairs. Pairs are independent, so a graph's
//! probability is a product of per-pair Bernoulli terms.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, Universe};
use crate::linalg::SymmetricMatrix;
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq)]
pub struct GbterParams {
    universe: Arc<Universe>,
    partition: Partition,
    density: Vec<f64>,
    expected_degree: Vec<f64>,
}

impl GbterParams {
    pub fn new(
        universe: Arc<Universe>,
        partition: Partition,
        density: Vec<f64>,
        expected_degree: Vec<f64>,
    ) -> Result<Self> {
        if partition.node_count() != universe.len() {
            return Err(Error::InvalidPartition(
                "partition does not cover the universe".into(),
            ));
        }
        if density.len() != partition.len() {
            return Err(Error::invalid(format!(
                "{} densities for {} communities",
                density.len(),
                partition.len()
            )));
        }
        if expected_degree.len() != universe.len() {
            return Err(Error::invalid(format!(
                "{} expected degrees for {} nodes",
                expected_degree.len(),
                universe.len()
            )));
        }
        if let Some(p) = density.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::invalid(format!("density {p} outside [0, 1]")));
        }
        if let Some(l) = expected_degree.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::invalid(format!("expected degree {l} is not a finite non-negative value")));
        }
        Ok(GbterParams {
            universe,
            partition,
            density,
            expected_degree,
        })
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn node_count(&self) -> usize {
        self.universe.len()
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn expected_degree(&self) -> &[f64] {
        &self.expected_degree
    }

    /// Density of the community containing `node`.
    pub fn density_of(&self, node: usize) -> Result<f64> {
        Ok(self.density[self.partition.community_of(node)?])
    }

    /// `max(0, lambda_i - p_j (|C_j| - 1))` for every node.
    pub fn excess_degrees(&self) -> Vec<f64> {
        (0..self.node_count())
            .map(|i| {
                let c = self.partition.assignment()[i];
                let block = (self.partition.communities()[c].len() - 1) as f64;
                (self.expected_degree[i] - self.density[c] * block).max(0.0)
            })
            .collect()
    }

    /// Probability that `i` and `j` are adjacent.
    pub fn edge_probability(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.node_count();
        if i >= n {
            return Err(Error::UnknownNode(i));
        }
        if j >= n {
            return Err(Error::UnknownNode(j));
        }
        if i == j {
            return Err(Error::invalid("edge probability of a self-pair"));
        }
        let excess = self.excess_degrees();
        let total: f64 = excess.iter().sum();
        Ok(self.pair_probability(i, j, &excess, total))
    }

    fn pair_probability(&self, i: usize, j: usize, excess: &[f64], total: f64) -> f64 {
        let chung_lu = if total > 0.0 {
            excess[i] * excess[j] / total
        } else {
            0.0
        };
        let p = if self.partition.same_community(i, j) {
            let d = self.density[self.partition.assignment()[i]];
            d + (1.0 - d) * chung_lu
        } else {
            chung_lu
        };
        p.clamp(0.0, 1.0)
    }

    /// Pairs whose Chung-Lu term exceeds 1; their probability is clamped.
    pub fn validate_chung_lu(&self) -> Vec<(usize, usize)> {
        let excess = self.excess_degrees();
        let total: f64 = excess.iter().sum();
        let n = self.node_count();
        let mut bad = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if excess[i] * excess[j] > total {
                    bad.push((i, j));
                }
            }
        }
        bad
    }

    /// Materializes every pair probability.
    pub fn edge_probabilities(&self) -> EdgeProbabilityTable {
        let n = self.node_count();
        let excess = self.excess_degrees();
        let total: f64 = excess.iter().sum();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let p = self.pair_probability(i, j, &excess, total);
                data[i * n + j] = p;
                data[j * n + i] = p;
            }
        }
        EdgeProbabilityTable { n, data }
    }

    /// `E(A)`: pair probabilities off the diagonal, zero on it.
    pub fn expected_adjacency(&self) -> SymmetricMatrix {
        let table = self.edge_probabilities();
        SymmetricMatrix::from_row_major(table.n, table.data)
    }

    /// Draws one graph; every pair is included independently.
    pub fn sample_graph<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledGraph {
        GraphSampler::new(self).sample(rng)
    }

    pub fn to_document(&self) -> ParamsDocument {
        let labels = self.universe.labels();
        ParamsDocument {
            universe: labels.to_vec(),
            communities: self
                .partition
                .communities()
                .iter()
                .map(|c| c.iter().map(|&i| labels[i].clone()).collect())
                .collect(),
            densities: self.density.clone(),
            expected_degrees: labels
                .iter()
                .cloned()
                .zip(self.expected_degree.iter().copied())
                .collect(),
        }
    }

    pub fn from_document(doc: ParamsDocument) -> Result<Self> {
        let universe = Arc::new(Universe::new(doc.universe)?);
        let blocks = doc
            .communities
            .iter()
            .map(|c| c.iter().map(|l| universe.index_of(l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        // Communities are re-ordered canonically; carry densities along.
        let mut order: Vec<(usize, usize)> = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| (b.iter().copied().min().unwrap_or(usize::MAX), k))
            .collect();
        order.sort_unstable();
        let partition = Partition::new(universe.len(), blocks)?;
        if doc.densities.len() != partition.len() {
            return Err(Error::invalid("one density per community is required"));
        }
        let density = order.iter().map(|&(_, k)| doc.densities[k]).collect();
        let expected_degree = universe
            .labels()
            .iter()
            .map(|l| {
                doc.expected_degrees
                    .get(l)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("no expected degree for `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        GbterParams::new(universe, partition, density, expected_degree)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_document())? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GbterParams::from_document(serde_json::from_str(&text)?)
    }
}

/// Serialized form of [`GbterParams`], keyed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDocument {
    pub universe: Vec<String>,
    pub communities: Vec<Vec<String>>,
    pub densities: Vec<f64>,
    pub expected_degrees: BTreeMap<String, f64>,
}

/// Dense symmetric table of pair probabilities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbabilityTable {
    n: usize,
    data: Vec<f64>,
}

impl EdgeProbabilityTable {
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Repeated sampling from one parameter set.
pub struct GraphSampler {
    universe: Arc<Universe>,
    table: EdgeProbabilityTable,
}

impl GraphSampler {
    pub fn new(params: &GbterParams) -> Self {
        GraphSampler {
            universe: params.universe.clone(),
            table: params.edge_probabilities(),
        }
    }

    pub fn table(&self) -> &EdgeProbabilityTable {
        &self.table
    }

    /// Fills `adjacency` with a fresh draw; rows come out sorted.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, adjacency: &mut [Vec<usize>]) {
        let n = self.table.n;
        for row in adjacency.iter_mut() {
            row.clear();
        }
        for i in 0..n {
            let probs = self.table.row(i);
            for j in i + 1..n {
                let p = probs[j];
                if p > 0.0 && (p >= 1.0 || rng.random::<f64>() < p) {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledGraph {
        let mut adjacency = vec![Vec::new(); self.table.n];
        self.sample_into(rng, &mut adjacency);
        LabeledGraph::from_adjacency_unchecked(self.universe.clone(), adjacency)
    }
}
