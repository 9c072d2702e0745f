//! Seeded synthetic experiments: a regular model generates a stream into
//! which a perturbed model injects every `anomaly_period`-th graph, and the
//! detectors' p-values are scored against the known perturbation.

mod eval;
pub mod season;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorKind, Pipeline, PipelineConfig};
use crate::error::{Error, Result};
use crate::graph::{GraphSequence, SnapshotKey, Universe};
use crate::model::GbterParams;
use crate::partition::Partition;

pub use eval::{evaluate, operating_point, EvalCurve, Evaluation, OperatingPoint, RocPoint, Scored};

/// Seed of the expected-degree draw shared by both experiments.
pub const SPEC_SEED: u64 = 2016;

const NODES: usize = 40;
const COMMUNITY_SIZE: usize = 4;
const DENSITY: f64 = 0.8;
const DEGREE_SUPPORT: [f64; 4] = [5.0, 6.0, 7.0, 8.0];
const POWER_LAW_EXPONENT: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Graph,
    Community,
    Node,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Graph, Level::Community, Level::Node];

    pub fn name(self) -> &'static str {
        match self {
            Level::Graph => "graph",
            Level::Community => "community",
            Level::Node => "node",
        }
    }
}

/// Nodes and communities (ids in the regular partition) that the anomaly
/// model perturbs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub nodes: BTreeSet<usize>,
    pub communities: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub regular: GbterParams,
    pub anomaly: GbterParams,
    pub train_count: usize,
    pub stream_count: usize,
    pub anomaly_period: usize,
    pub truth: GroundTruth,
}

impl ExperimentSpec {
    /// Whether the `index`-th streamed graph (0-based) comes from the anomaly model.
    pub fn is_anomalous(&self, index: usize) -> bool {
        (index + 1).is_multiple_of(self.anomaly_period)
    }

    pub fn anomalous_count(&self) -> usize {
        (0..self.stream_count).filter(|&i| self.is_anomalous(i)).count()
    }
}

/// Expected degrees drawn from `P(k) ∝ k^-2.5` on `{5, 6, 7, 8}`.
pub fn power_law_degrees(n: usize, seed: u64) -> Vec<f64> {
    let weights = DEGREE_SUPPORT.map(|k| k.powf(-POWER_LAW_EXPONENT));
    let dist = WeightedIndex::new(weights).expect("positive weights");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| DEGREE_SUPPORT[dist.sample(&mut rng)]).collect()
}

fn regular_partition() -> Partition {
    let blocks = (0..NODES / COMMUNITY_SIZE)
        .map(|c| (c * COMMUNITY_SIZE..(c + 1) * COMMUNITY_SIZE).collect())
        .collect();
    Partition::new(NODES, blocks).expect("contiguous blocks")
}

fn regular_model(universe: &Arc<Universe>, degrees: &[f64]) -> GbterParams {
    let partition = regular_partition();
    let k = partition.len();
    GbterParams::new(universe.clone(), partition, vec![DENSITY; k], degrees.to_vec()).expect("valid regular model")
}

/// Two nodes of each of the first three communities swap places.
pub fn build_experiment1() -> ExperimentSpec {
    build_experiment1_with(SPEC_SEED)
}

pub fn build_experiment1_with(spec_seed: u64) -> ExperimentSpec {
    let universe = Arc::new(Universe::numbered(NODES));
    let degrees = power_law_degrees(NODES, spec_seed);
    let regular = regular_model(&universe, &degrees);
    let mut blocks: Vec<Vec<usize>> = regular.partition().communities().to_vec();
    blocks[0] = vec![0, 11, 2, 4];
    blocks[1] = vec![3, 5, 6, 8];
    blocks[2] = vec![7, 9, 10, 1];
    let partition = Partition::new(NODES, blocks).expect("swapped blocks");
    let anomaly = GbterParams::new(universe, partition, vec![DENSITY; NODES / COMMUNITY_SIZE], degrees)
        .expect("valid anomaly model");
    let truth = moved_nodes(regular.partition(), anomaly.partition());
    ExperimentSpec {
        name: "experiment1".into(),
        regular,
        anomaly,
        train_count: 100,
        stream_count: 500,
        anomaly_period: 5,
        truth,
    }
}

/// The first four communities get density 0.4 and their nodes two more
/// expected degree.
pub fn build_experiment2() -> ExperimentSpec {
    build_experiment2_with(SPEC_SEED)
}

pub fn build_experiment2_with(spec_seed: u64) -> ExperimentSpec {
    let universe = Arc::new(Universe::numbered(NODES));
    let degrees = power_law_degrees(NODES, spec_seed);
    let regular = regular_model(&universe, &degrees);
    let changed: BTreeSet<usize> = (0..4).collect();
    let density = (0..NODES / COMMUNITY_SIZE)
        .map(|c| if changed.contains(&c) { 0.4 } else { DENSITY })
        .collect();
    let partition = regular.partition().clone();
    let shifted = degrees
        .iter()
        .enumerate()
        .map(|(i, &l)| if changed.contains(&partition.assignment()[i]) { l + 2.0 } else { l })
        .collect();
    let anomaly = GbterParams::new(universe, partition, density, shifted).expect("valid anomaly model");
    let truth = parameter_delta(&regular, &anomaly);
    ExperimentSpec {
        name: "experiment2".into(),
        regular,
        anomaly,
        train_count: 100,
        stream_count: 500,
        anomaly_period: 5,
        truth,
    }
}

/// Nodes that changed community, each anomaly community being identified
/// with the regular community it overlaps most, and the regular communities
/// those nodes left.
pub fn moved_nodes(regular: &Partition, anomaly: &Partition) -> GroundTruth {
    let matched = match_communities(anomaly, regular);
    let nodes: BTreeSet<usize> = (0..regular.node_count())
        .filter(|&i| regular.assignment()[i] != matched[anomaly.assignment()[i]])
        .collect();
    let communities = nodes.iter().map(|&i| regular.assignment()[i]).collect();
    GroundTruth { nodes, communities }
}

/// Communities whose density changed or that hold a node whose expected
/// degree changed, and the nodes of those communities.
pub fn parameter_delta(regular: &GbterParams, anomaly: &GbterParams) -> GroundTruth {
    let part = regular.partition();
    let mut communities = BTreeSet::new();
    for (c, (a, b)) in regular.density().iter().zip(anomaly.density()).enumerate() {
        if a != b {
            communities.insert(c);
        }
    }
    for (i, (a, b)) in regular.expected_degree().iter().zip(anomaly.expected_degree()).enumerate() {
        if a != b {
            communities.insert(part.assignment()[i]);
        }
    }
    let nodes = communities
        .iter()
        .flat_map(|&c| part.communities()[c].iter().copied())
        .collect();
    GroundTruth { nodes, communities }
}

/// The true community sharing the most members with each fitted community
/// (lowest id on ties).
pub fn match_communities(fitted: &Partition, truth: &Partition) -> Vec<usize> {
    fitted
        .communities()
        .iter()
        .map(|members| {
            let mut overlap: BTreeMap<usize, usize> = BTreeMap::new();
            for &i in members {
                *overlap.entry(truth.assignment()[i]).or_default() += 1;
            }
            let best = overlap.values().copied().max().unwrap_or(0);
            overlap
                .into_iter()
                .find(|&(_, v)| v == best)
                .map(|(c, _)| c)
                .expect("non-empty community")
        })
        .collect()
}

/// Pooled labeled p-values of one detector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectorScores {
    pub graph: Vec<Scored>,
    pub community: Vec<Scored>,
    pub node: Vec<Scored>,
}

impl DetectorScores {
    pub fn level(&self, level: Level) -> &[Scored] {
        match level {
            Level::Graph => &self.graph,
            Level::Community => &self.community,
            Level::Node => &self.node,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentScores {
    pub scores: BTreeMap<DetectorKind, DetectorScores>,
    /// Partition used for scoring, as fitted on the training graphs.
    pub partition: Partition,
}

impl ExperimentScores {
    pub fn evaluate(&self, detector: DetectorKind, level: Level) -> Option<Evaluation> {
        let scores = self.scores.get(&detector)?.level(level);
        if scores.is_empty() {
            return None;
        }
        Some(evaluate(scores))
    }
}

/// Samples the training graphs and the stream, runs the pipeline over the
/// stream and labels every p-value with the ground truth.
///
/// Graphs come from ChaCha8 stream `u64::MAX` of `seed`; Monte-Carlo
/// sampling uses stream `t` at step `t` of the same seed, so the two never
/// overlap.
pub fn run_experiment(
    spec: &ExperimentSpec,
    detectors: &[DetectorKind],
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<ExperimentScores> {
    if spec.train_count == 0 || spec.anomaly_period == 0 {
        return Err(Error::invalid("train_count and anomaly_period must be positive"));
    }
    let mut cfg = cfg.clone();
    cfg.detectors = detectors.to_vec();
    cfg.detector.seed = seed;
    let universe = spec.regular.universe().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);

    let training: Vec<_> = (0..spec.train_count).map(|_| spec.regular.sample_graph(&mut rng)).collect();
    let training = GraphSequence::from_graphs(universe, training)?;
    let mut pipeline = Pipeline::train(&training, cfg)?;
    let partition = pipeline.partition().clone();

    let mut scores: BTreeMap<DetectorKind, DetectorScores> =
        detectors.iter().map(|&d| (d, DetectorScores::default())).collect();
    for index in 0..spec.stream_count {
        let anomalous = spec.is_anomalous(index);
        let model = if anomalous { &spec.anomaly } else { &spec.regular };
        let g = model.sample_graph(&mut rng);
        let key = SnapshotKey::Int((spec.train_count + index) as i64);
        let matched = match_communities(pipeline.partition(), spec.regular.partition());
        for report in pipeline.step(key, &g)? {
            let out = scores.get_mut(&report.detector).expect("requested detector");
            out.graph.push(Scored { pvalue: report.graph_pvalue, anomalous });
            for c in &report.communities {
                out.community.push(Scored {
                    pvalue: c.pvalue,
                    anomalous: anomalous && spec.truth.communities.contains(&matched[c.id]),
                });
            }
            for (i, n) in report.nodes.iter().enumerate() {
                out.node.push(Scored {
                    pvalue: n.pvalue,
                    anomalous: anomalous && spec.truth.nodes.contains(&i),
                });
            }
        }
    }
    Ok(ExperimentScores { scores, partition })
}

/// One line of a results table: the best-F1 operating point and AUC of a
/// detector at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub experiment: String,
    pub level: Level,
    pub method: DetectorKind,
    pub alpha: Option<f64>,
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub auc: Option<f64>,
}

/// Rows in level order; the baseline appears at graph level only.
pub fn results_table(name: &str, scores: &ExperimentScores) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for level in Level::ALL {
        for &method in scores.scores.keys() {
            let Some(eval) = scores.evaluate(method, level) else {
                continue;
            };
            let best = eval.best();
            rows.push(TableRow {
                experiment: name.to_string(),
                level,
                method,
                alpha: best.map(|b| b.alpha),
                f1: best.map(|b| b.f1),
                precision: best.map(|b| b.precision),
                recall: best.map(|b| b.recall),
                auc: eval.auc(),
            });
        }
    }
    rows
}
