//! Node-labeled undirected graphs, graph sequences and edge aggregation.
//!
//! Every graph in a sequence shares one [`Universe`]; nodes that do not take
//! part in a snapshot are present with degree 0.

mod aggregate;
pub mod io;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

pub use aggregate::{aggregate_counts, aggregate_exponential, aggregate_with, WeightedAggregate};

/// Ordered set of node labels. The position of a label is its node index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Universe { labels, index })
    }

    /// Universe labelled `"0"`, `"1"`, ... in numeric order.
    pub fn numbered(n: usize) -> Self {
        Universe::new((0..n).map(|i| i.to_string())).expect("numbered labels are unique")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Result<&str> {
        self.labels
            .get(i)
            .map(String::as_str)
            .ok_or(Error::UnknownNode(i))
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// True when the labels are in lexicographic order.
    pub fn is_canonical(&self) -> bool {
        self.labels.windows(2).all(|w| w[0] < w[1])
    }
}

pub(crate) fn same_universe(a: &Arc<Universe>, b: &Arc<Universe>) -> bool {
    Arc::ptr_eq(a, b) || a.labels == b.labels
}

/// Undirected simple graph over a fixed universe.
#[derive(Clone)]
pub struct LabeledGraph {
    universe: Arc<Universe>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl LabeledGraph {
    pub fn empty(universe: Arc<Universe>) -> Self {
        let n = universe.len();
        LabeledGraph {
            universe,
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from index pairs, rejecting self-loops, duplicates
    /// (in either orientation) and unknown indices.
    pub fn from_edges<I>(universe: Arc<Universe>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = LabeledGraph::empty(universe);
        for (i, j) in edges {
            g.insert_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn from_label_pairs<'a, I>(universe: Arc<Universe>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut g = LabeledGraph::empty(universe);
        for (a, b) in pairs {
            let i = g.universe.index_of(a)?;
            let j = g.universe.index_of(b)?;
            g.insert_edge(i, j)?;
        }
        Ok(g)
    }

    /// Adjacency must be symmetric, sorted and loop-free.
    pub(crate) fn from_adjacency_unchecked(universe: Arc<Universe>, adjacency: Vec<Vec<usize>>) -> Self {
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        LabeledGraph {
            universe,
            adjacency,
            edge_count,
        }
    }

    fn insert_edge(&mut self, i: usize, j: usize) -> Result<()> {
        let n = self.universe.len();
        if i >= n {
            return Err(Error::UnknownNode(i));
        }
        if j >= n {
            return Err(Error::UnknownNode(j));
        }
        if i == j {
            return Err(Error::SelfLoop(self.universe.labels[i].clone()));
        }
        match self.adjacency[i].binary_search(&j) {
            Ok(_) => Err(Error::DuplicateEdge(
                self.universe.labels[i].clone(),
                self.universe.labels[j].clone(),
            )),
            Err(pos) => {
                self.adjacency[i].insert(pos, j);
                let pos = self.adjacency[j].binary_search(&i).unwrap_err();
                self.adjacency[j].insert(pos, i);
                self.edge_count += 1;
                Ok(())
            }
        }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.adjacency
            .get(i)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownNode(i))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency
            .get(i)
            .is_some_and(|adj| adj.binary_search(&j).is_ok())
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        self.neighbors(i).map(<[usize]>::len)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Internal and external degree of `i` with respect to `partition`.
    pub fn split_degree(&self, i: usize, partition: &Partition) -> Result<(usize, usize)> {
        let neighbors = self.neighbors(i)?;
        if partition.node_count() != self.node_count() {
            return Err(Error::InvalidPartition(
                "partition does not cover the graph universe".into(),
            ));
        }
        let home = partition.community_of(i)?;
        let d_in = neighbors
            .iter()
            .filter(|&&j| partition.assignment()[j] == home)
            .count();
        Ok((d_in, neighbors.len() - d_in))
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Same edge set re-indexed onto a lexicographically sorted universe.
    pub fn canonicalize(&self) -> LabeledGraph {
        let mut labels = self.universe.labels.clone();
        labels.sort();
        let universe = Arc::new(Universe::new(labels).expect("labels already unique"));
        self.reindex(universe).expect("same label set")
    }

    /// Moves this graph onto another universe containing all of its labels.
    pub fn reindex(&self, universe: Arc<Universe>) -> Result<LabeledGraph> {
        let map: Vec<usize> = self
            .universe
            .labels
            .iter()
            .map(|l| universe.index_of(l))
            .collect::<Result<_>>()?;
        LabeledGraph::from_edges(universe, self.edges().map(|(i, j)| (map[i], map[j])))
    }
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        same_universe(&self.universe, &other.universe) && self.adjacency == other.adjacency
    }
}

impl Eq for LabeledGraph {}

impl fmt::Debug for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<(&str, &str)> = self
            .edges()
            .map(|(i, j)| (self.universe.labels[i].as_str(), self.universe.labels[j].as_str()))
            .collect();
        f.debug_struct("LabeledGraph")
            .field("nodes", &self.universe.len())
            .field("edges", &edges)
            .finish()
    }
}

/// Key identifying a snapshot, e.g. a season year.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnapshotKey {
    Int(i64),
    Text(String),
}

impl fmt::Display for SnapshotKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapshotKey::Int(v) => write!(f, "{v}"),
            SnapshotKey::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for SnapshotKey {
    fn from(v: i64) -> Self {
        SnapshotKey::Int(v)
    }
}

impl From<&str> for SnapshotKey {
    fn from(s: &str) -> Self {
        SnapshotKey::Text(s.to_string())
    }
}

/// Ordered snapshots over one shared universe, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSequence {
    universe: Arc<Universe>,
    snapshots: Vec<LabeledGraph>,
    keys: Vec<SnapshotKey>,
}

impl GraphSequence {
    pub fn new(universe: Arc<Universe>) -> Self {
        GraphSequence {
            universe,
            snapshots: Vec::new(),
            keys: Vec::new(),
        }
    }

    /// Snapshots keyed by their position.
    pub fn from_graphs(universe: Arc<Universe>, graphs: Vec<LabeledGraph>) -> Result<Self> {
        let mut seq = GraphSequence::new(universe);
        for g in graphs {
            let key = SnapshotKey::Int(seq.len() as i64);
            seq.push(key, g)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, key: SnapshotKey, graph: LabeledGraph) -> Result<()> {
        if !same_universe(&self.universe, graph.universe()) {
            return Err(Error::UniverseMismatch);
        }
        self.keys.push(key);
        self.snapshots.push(graph);
        Ok(())
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[LabeledGraph] {
        &self.snapshots
    }

    pub fn keys(&self) -> &[SnapshotKey] {
        &self.keys
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SnapshotKey, &LabeledGraph)> {
        self.keys.iter().zip(&self.snapshots)
    }

    /// The first `len` snapshots.
    pub fn prefix(&self, len: usize) -> GraphSequence {
        let len = len.min(self.len());
        GraphSequence {
            universe: self.universe.clone(),
            snapshots: self.snapshots[..len].to_vec(),
            keys: self.keys[..len].to_vec(),
        }
    }
}
