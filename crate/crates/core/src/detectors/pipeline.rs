//! Streaming detection: fit on a training prefix, then for each new snapshot
//! score it against the current model and fold it into the posteriors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::montecarlo::{rank_pvalue, SampleScores};
use super::report::{is_flagged, AnomalyReport, CommunityEntry, DetectorConfig, DetectorKind, NodeEntry};
use super::{baseline_stats_with, BaselineStats, GaussianBaselineState, LogProb, ProbabilityScorer, StatisticsScorer};
use crate::error::{Error, Result};
use crate::fitting::{fit_gbter, markov_cluster, CommunitySource, FitConfig, MclOutcome, PosteriorState};
use crate::graph::{same_universe, GraphSequence, LabeledGraph, SnapshotKey};
use crate::linalg::SymmetricMatrix;
use crate::model::{GbterParams, GraphSampler};
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub fit: FitConfig,
    pub detector: DetectorConfig,
    pub detectors: Vec<DetectorKind>,
    /// Fold snapshots flagged at graph level into the posteriors too.
    pub update_with_anomalies: bool,
    /// Re-run community detection on the full history every this many updates.
    pub recluster_every: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            fit: FitConfig::default(),
            detector: DetectorConfig::default(),
            detectors: DetectorKind::ALL.to_vec(),
            update_with_anomalies: true,
            recluster_every: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.fit.mcl.validate()?;
        self.fit.priors.validate()?;
        if self.detectors.is_empty() {
            return Err(Error::invalid("no detectors selected"));
        }
        if self.recluster_every == Some(0) {
            return Err(Error::invalid("recluster_every must be positive"));
        }
        Ok(())
    }
}

fn adjacency_of(g: &LabeledGraph) -> Vec<Vec<usize>> {
    (0..g.node_count())
        .map(|i| g.neighbors(i).expect("in range").to_vec())
        .collect()
}

/// Scores of one graph at every level under one detector.
struct LevelScores {
    graph: LogProb,
    communities: Vec<LogProb>,
    nodes: Vec<LogProb>,
}

/// Everything derived from one parameter set that scoring needs.
struct Scorers<'a> {
    params: &'a GbterParams,
    prob: ProbabilityScorer,
    stats: StatisticsScorer,
}

impl<'a> Scorers<'a> {
    fn new(params: &'a GbterParams, truncate_poisson: bool) -> Self {
        Scorers {
            params,
            prob: ProbabilityScorer::from_params(params),
            stats: StatisticsScorer::new(params, truncate_poisson),
        }
    }

    fn score(&self, kind: DetectorKind, adjacency: &[Vec<usize>], out: &mut LevelScores) {
        let communities = self.params.partition().communities();
        match kind {
            DetectorKind::Prob => {
                self.prob.node_scores(adjacency, &mut out.nodes);
                out.graph = self.prob.graph_score(adjacency);
                for (c, members) in communities.iter().enumerate() {
                    out.communities[c] = ProbabilityScorer::subset_score(&out.nodes, members);
                }
            }
            DetectorKind::Stats => {
                self.stats.node_scores(adjacency, &mut out.nodes);
                out.graph = out.nodes.iter().copied().sum();
                for (c, members) in communities.iter().enumerate() {
                    out.communities[c] = StatisticsScorer::subset_score(&out.nodes, members);
                }
            }
            DetectorKind::Baseline => unreachable!("baseline has no multi-scale scores"),
        }
    }
}

/// Fitted model, posteriors and baseline moments of a running stream.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: PipelineConfig,
    params: GbterParams,
    posterior: PosteriorState,
    baseline: GaussianBaselineState,
    history: GraphSequence,
    clustering: Option<MclOutcome>,
    steps: u64,
}

impl Pipeline {
    /// Fits the model to `training` and seeds the baseline moments with the
    /// training graphs' statistics.
    pub fn train(training: &GraphSequence, cfg: PipelineConfig) -> Result<Pipeline> {
        cfg.validate()?;
        let fit = fit_gbter(training, &cfg.fit)?;
        let expected = fit.params.expected_adjacency();
        let mut baseline = GaussianBaselineState::new();
        for g in training.snapshots() {
            baseline.observe(&baseline_stats_with(&adjacency_of(g), &expected));
        }
        Ok(Pipeline {
            cfg,
            params: fit.params,
            posterior: fit.posterior,
            baseline,
            history: training.clone(),
            clustering: fit.clustering,
            steps: 0,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn params(&self) -> &GbterParams {
        &self.params
    }

    pub fn posterior(&self) -> &PosteriorState {
        &self.posterior
    }

    pub fn baseline(&self) -> &GaussianBaselineState {
        &self.baseline
    }

    pub fn partition(&self) -> &Partition {
        self.params.partition()
    }

    /// Outcome of the most recent community detection, if any ran.
    pub fn clustering(&self) -> Option<&MclOutcome> {
        self.clustering.as_ref()
    }

    /// Number of snapshots scored so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Scores `g`, then updates the model with it. The Monte-Carlo stream of
    /// step `t` is seeded from `(seed, t)` so runs replay exactly.
    pub fn step(&mut self, key: SnapshotKey, g: &LabeledGraph) -> Result<Vec<AnomalyReport>> {
        let reports = self.score(key.clone(), g)?;
        let anomalous = reports.iter().any(|r| r.graph_flagged);
        if self.cfg.update_with_anomalies || !anomalous {
            self.update(key, g)?;
        }
        self.steps += 1;
        Ok(reports)
    }

    /// One report per enabled detector, without changing any state.
    pub fn score(&self, key: SnapshotKey, g: &LabeledGraph) -> Result<Vec<AnomalyReport>> {
        if !same_universe(self.params.universe(), g.universe()) {
            return Err(Error::UniverseMismatch);
        }
        let adjacency = adjacency_of(g);
        let multiscale: Vec<DetectorKind> = self
            .cfg
            .detectors
            .iter()
            .copied()
            .filter(|k| k.is_multiscale())
            .collect();
        let mut reports = Vec::with_capacity(self.cfg.detectors.len());
        if !multiscale.is_empty() {
            let scorers = Scorers::new(&self.params, self.cfg.detector.truncate_poisson);
            let samples = self.sample_scores(&scorers, &multiscale);
            for (kind, sample) in multiscale.iter().zip(&samples) {
                reports.push(self.multiscale_report(&scorers, *kind, &key, &adjacency, sample));
            }
        }
        if self.cfg.detectors.contains(&DetectorKind::Baseline) {
            let stats = baseline_stats_with(&adjacency, &self.params.expected_adjacency());
            reports.push(self.baseline_report(&key, stats)?);
        }
        reports.sort_by_key(|r| r.detector);
        Ok(reports)
    }

    /// Draws one shared set of sample graphs and scores it under every
    /// multi-scale detector.
    fn sample_scores(&self, scorers: &Scorers<'_>, kinds: &[DetectorKind]) -> Vec<SampleScores> {
        let n = self.params.node_count();
        let k = self.params.partition().len();
        let m = self.cfg.detector.mc_samples;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.detector.seed);
        rng.set_stream(self.steps);
        let sampler = GraphSampler::new(&self.params);
        let mut adjacency = vec![Vec::new(); n];
        let mut level = LevelScores {
            graph: LogProb::ZERO,
            communities: vec![LogProb::ZERO; k],
            nodes: vec![LogProb::ZERO; n],
        };
        let mut out: Vec<SampleScores> = kinds.iter().map(|_| SampleScores::with_capacity(k, n, m)).collect();
        for _ in 0..m {
            sampler.sample_into(&mut rng, &mut adjacency);
            for (kind, scores) in kinds.iter().zip(out.iter_mut()) {
                scorers.score(*kind, &adjacency, &mut level);
                scores.graph.push(level.graph);
                for (c, s) in level.communities.iter().enumerate() {
                    scores.communities[c].push(*s);
                }
                for (i, s) in level.nodes.iter().enumerate() {
                    scores.nodes[i].push(*s);
                }
            }
        }
        out.iter_mut().for_each(SampleScores::sort);
        out
    }

    fn multiscale_report(
        &self,
        scorers: &Scorers<'_>,
        kind: DetectorKind,
        key: &SnapshotKey,
        adjacency: &[Vec<usize>],
        samples: &SampleScores,
    ) -> AnomalyReport {
        let n = adjacency.len();
        let partition = self.params.partition();
        let universe = self.params.universe();
        let alpha = self.cfg.detector.thresholds;
        let mut observed = LevelScores {
            graph: LogProb::ZERO,
            communities: vec![LogProb::ZERO; partition.len()],
            nodes: vec![LogProb::ZERO; n],
        };
        scorers.score(kind, adjacency, &mut observed);

        let graph_pvalue = rank_pvalue(&samples.graph, observed.graph);
        let communities = partition
            .communities()
            .iter()
            .enumerate()
            .map(|(c, members)| {
                let pvalue = rank_pvalue(&samples.communities[c], observed.communities[c]);
                CommunityEntry {
                    id: c,
                    members: members.iter().map(|&i| universe.labels()[i].clone()).collect(),
                    pvalue,
                    flagged: is_flagged(pvalue, alpha.community),
                }
            })
            .collect();
        let nodes = (0..n)
            .map(|i| {
                let (d_in, d_ex) = scorers.stats.split(adjacency, i);
                let pvalue = match kind {
                    DetectorKind::Stats => scorers.stats.node_pvalue_exact(i, d_in, d_ex),
                    _ => rank_pvalue(&samples.nodes[i], observed.nodes[i]),
                };
                NodeEntry {
                    label: universe.labels()[i].clone(),
                    community: partition.assignment()[i],
                    degree: d_in + d_ex,
                    d_in,
                    d_ex,
                    pvalue,
                    flagged: is_flagged(pvalue, alpha.node),
                }
            })
            .collect();
        AnomalyReport {
            detector: kind,
            snapshot: key.clone(),
            thresholds: alpha,
            graph_pvalue,
            graph_flagged: is_flagged(graph_pvalue, alpha.graph),
            communities,
            nodes,
            stats: None,
        }
    }

    fn baseline_report(&self, key: &SnapshotKey, stats: BaselineStats) -> Result<AnomalyReport> {
        let pvalue = self.baseline.pvalue(&stats)?;
        let alpha = self.cfg.detector.thresholds;
        Ok(AnomalyReport {
            detector: DetectorKind::Baseline,
            snapshot: key.clone(),
            thresholds: alpha,
            graph_pvalue: pvalue,
            graph_flagged: is_flagged(pvalue, alpha.graph),
            communities: Vec::new(),
            nodes: Vec::new(),
            stats: Some(stats),
        })
    }

    /// Folds `g` into the posteriors and baseline moments, reclustering when
    /// scheduled.
    pub fn update(&mut self, key: SnapshotKey, g: &LabeledGraph) -> Result<()> {
        let expected: SymmetricMatrix = self.params.expected_adjacency();
        let stats = baseline_stats_with(&adjacency_of(g), &expected);
        self.posterior.update(g)?;
        self.baseline.observe(&stats);
        self.history.push(key, g.clone())?;
        if let (Some(every), CommunitySource::MarkovClustering) = (self.cfg.recluster_every, &self.cfg.fit.communities) {
            if self.posterior.observations().is_multiple_of(every) {
                let weights = self.cfg.fit.weighting.aggregate(&self.history)?;
                let outcome = markov_cluster(&weights, &self.cfg.fit.mcl)?;
                self.posterior.repartition(outcome.partition.clone(), &self.history)?;
                self.clustering = Some(outcome);
            }
        }
        self.params = self.posterior.to_params()?;
        Ok(())
    }
}
