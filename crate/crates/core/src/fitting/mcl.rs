//! Markov clustering on a weighted aggregate.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedAggregate;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MclConfig {
    /// Matrix power applied per iteration, at least 2.
    pub expansion: u32,
    /// Entrywise power applied per iteration, greater than 1.
    pub inflation: f64,
    /// Diagonal weight before normalizing, as a multiple of the heaviest
    /// edge at that node; an isolated node gets this value as is.
    pub self_loop_weight: f64,
    pub prune_threshold: f64,
    pub max_iters: usize,
    pub convergence_eps: f64,
}

impl Default for MclConfig {
    fn default() -> Self {
        MclConfig {
            expansion: 2,
            inflation: 2.0,
            self_loop_weight: 1.0,
            prune_threshold: 1e-5,
            max_iters: 200,
            convergence_eps: 1e-8,
        }
    }
}

impl MclConfig {
    pub fn validate(&self) -> Result<()> {
        if self.expansion < 2 {
            return Err(Error::invalid("MCL expansion must be at least 2"));
        }
        if self.inflation.is_nan() || self.inflation <= 1.0 {
            return Err(Error::invalid("MCL inflation must exceed 1"));
        }
        if self.self_loop_weight.is_nan() || self.self_loop_weight < 0.0 {
            return Err(Error::invalid("MCL self-loop weight must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.prune_threshold) {
            return Err(Error::invalid("MCL prune threshold must lie in [0, 1)"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("MCL needs at least one iteration"));
        }
        if self.convergence_eps.is_nan() || self.convergence_eps <= 0.0 {
            return Err(Error::invalid("MCL convergence epsilon must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MclOutcome {
    pub partition: Partition,
    pub iterations: usize,
    /// False when `max_iters` was reached; the partition is then read from the
    /// last iterate.
    pub converged: bool,
}

/// Column-stochastic dense matrix, column-major.
struct FlowMatrix {
    n: usize,
    cols: Vec<f64>,
}

impl FlowMatrix {
    #[inline]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.cols[col * self.n + row]
    }

    fn normalize_columns(&mut self) {
        for col in self.cols.chunks_mut(self.n) {
            let sum: f64 = col.iter().sum();
            if sum > 0.0 {
                col.iter_mut().for_each(|v| *v /= sum);
            }
        }
    }

    fn multiply(&self, other: &FlowMatrix) -> FlowMatrix {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for j in 0..n {
            let dst = &mut out[j * n..(j + 1) * n];
            for k in 0..n {
                let b = other.cols[j * n + k];
                if b == 0.0 {
                    continue;
                }
                let src = &self.cols[k * n..(k + 1) * n];
                for (d, &a) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        FlowMatrix { n, cols: out }
    }

    fn power(&self, e: u32) -> FlowMatrix {
        let mut acc = self.multiply(self);
        for _ in 2..e {
            acc = acc.multiply(self);
        }
        acc
    }

    fn inflate(&mut self, r: f64) {
        self.cols.iter_mut().for_each(|v| *v = v.powf(r));
        self.normalize_columns();
    }

    fn prune(&mut self, threshold: f64) {
        self.cols.iter_mut().for_each(|v| {
            if *v < threshold {
                *v = 0.0;
            }
        });
        self.normalize_columns();
    }

    fn max_change(&self, other: &FlowMatrix) -> f64 {
        self.cols
            .iter()
            .zip(&other.cols)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn markov_cluster(weights: &WeightedAggregate, cfg: &MclConfig) -> Result<MclOutcome> {
    cfg.validate()?;
    let n = weights.node_count();
    if n == 0 {
        return Err(Error::invalid("cannot cluster an empty universe"));
    }
    let mut cols = vec![0.0; n * n];
    for ((i, j), w) in weights.entries() {
        cols[j * n + i] = w;
        cols[i * n + j] = w;
    }
    for i in 0..n {
        let heaviest = cols[i * n..(i + 1) * n].iter().copied().fold(0.0, f64::max);
        let unit = if heaviest > 0.0 { heaviest } else { 1.0 };
        cols[i * n + i] = cfg.self_loop_weight * unit;
    }
    let mut m = FlowMatrix { n, cols };
    m.normalize_columns();

    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let mut next = m.power(cfg.expansion);
        next.inflate(cfg.inflation);
        next.prune(cfg.prune_threshold);
        let change = next.max_change(&m);
        m = next;
        if change < cfg.convergence_eps {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!("markov clustering stopped after {iterations} iterations without converging");
    }
    Ok(MclOutcome {
        partition: interpret(&m),
        iterations,
        converged,
    })
}

/// Groups attractors that exchange flow, then sends each node to the
/// attractor group holding most of its column mass.
fn interpret(m: &FlowMatrix) -> Partition {
    let n = m.n;
    let attractors: Vec<usize> = (0..n).filter(|&i| m.at(i, i) > 0.0).collect();

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for (k, &a) in attractors.iter().enumerate() {
        for &b in &attractors[k + 1..] {
            if m.at(a, b) > 0.0 || m.at(b, a) > 0.0 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    // Systems numbered by their smallest attractor.
    let mut system_of = vec![usize::MAX; n];
    let mut systems: Vec<Vec<usize>> = Vec::new();
    let mut root_id = vec![usize::MAX; n];
    for &a in &attractors {
        let r = find(&mut parent, a);
        if root_id[r] == usize::MAX {
            root_id[r] = systems.len();
            systems.push(Vec::new());
        }
        system_of[a] = root_id[r];
        systems[root_id[r]].push(a);
    }

    let mut assignment = vec![usize::MAX; n];
    for j in 0..n {
        let mut best = (usize::MAX, 0.0);
        for (s, members) in systems.iter().enumerate() {
            let mass: f64 = members.iter().map(|&a| m.at(a, j)).sum();
            if mass > best.1 {
                best = (s, mass);
            }
        }
        assignment[j] = best.0;
    }
    // Nodes without flow to any attractor become singletons.
    let mut next = systems.len();
    for a in assignment.iter_mut() {
        if *a == usize::MAX {
            *a = next;
            next += 1;
        }
    }
    Partition::from_assignment(&assignment).expect("every node has an assignment")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{aggregate_counts, GraphSequence, LabeledGraph, Universe};
    use std::sync::Arc;

    fn aggregate(n: usize, edges: &[(usize, usize)]) -> WeightedAggregate {
        let u = Arc::new(Universe::numbered(n));
        let g = LabeledGraph::from_edges(u.clone(), edges.iter().copied()).unwrap();
        aggregate_counts(&GraphSequence::from_graphs(u, vec![g]).unwrap()).unwrap()
    }

    fn clique(nodes: &[usize]) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (k, &i) in nodes.iter().enumerate() {
            for &j in &nodes[k + 1..] {
                e.push((i, j));
            }
        }
        e
    }

    #[test]
    fn two_cliques_with_bridge() {
        let mut edges = clique(&[0, 1, 2, 3]);
        edges.extend(clique(&[4, 5, 6, 7]));
        edges.push((3, 4));
        let out = markov_cluster(&aggregate(8, &edges), &MclConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.partition.communities(), &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
    }

    #[test]
    fn no_edges_gives_singletons() {
        let out = markov_cluster(&aggregate(5, &[]), &MclConfig::default()).unwrap();
        assert_eq!(out.partition, Partition::singletons(5));
        let bare = MclConfig {
            self_loop_weight: 0.0,
            ..MclConfig::default()
        };
        let out = markov_cluster(&aggregate(3, &[]), &bare).unwrap();
        assert_eq!(out.partition, Partition::singletons(3));
    }

    #[test]
    fn single_clique_is_one_community() {
        let out = markov_cluster(&aggregate(6, &clique(&[0, 1, 2, 3, 4, 5])), &MclConfig::default()).unwrap();
        assert_eq!(out.partition.len(), 1);
    }

    #[test]
    fn iteration_cap_still_returns_a_partition() {
        let mut edges = clique(&[0, 1, 2, 3]);
        edges.extend(clique(&[4, 5, 6, 7]));
        edges.push((3, 4));
        let cfg = MclConfig {
            max_iters: 1,
            ..MclConfig::default()
        };
        let out = markov_cluster(&aggregate(8, &edges), &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.partition.node_count(), 8);
    }

    #[test]
    fn config_bounds() {
        let bad = [
            MclConfig { expansion: 1, ..MclConfig::default() },
            MclConfig { inflation: 1.0, ..MclConfig::default() },
            MclConfig { self_loop_weight: -1.0, ..MclConfig::default() },
            MclConfig { max_iters: 0, ..MclConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }
}
