//! Learning model parameters from observed snapshots.
//!
//! Communities come from Markov clustering of an edge aggregate (or are
//! supplied), community densities from a Beta-Binomial posterior and expected
//! degrees from a Gamma-Poisson posterior. Both posteriors are conjugate, so a
//! stream is absorbed one graph at a time with [`PosteriorState::update`].

mod mcl;
mod posterior;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{aggregate_counts, aggregate_exponential, GraphSequence, WeightedAggregate};
use crate::model::{GbterParams, ParamsDocument};
use crate::partition::Partition;

pub use mcl::{markov_cluster, MclConfig, MclOutcome};
pub use posterior::{
    fit_density, fit_density_counts, fit_expected_degree, fit_expected_degree_counts, internal_edge_counts,
    BetaPosterior, DegreeFit, DensityFit, GammaPosterior, PosteriorDocument, PosteriorState, Priors,
};

/// How snapshots are combined into the weighted graph that is clustered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weighting {
    /// Number of snapshots containing each edge.
    #[default]
    Counts,
    /// Older snapshots down-weighted by `gamma` per step; newest weighs 1.
    Exponential { gamma: f64 },
}

impl Weighting {
    pub fn aggregate(&self, seq: &GraphSequence) -> Result<WeightedAggregate> {
        match *self {
            Weighting::Counts => aggregate_counts(seq),
            Weighting::Exponential { gamma } => aggregate_exponential(seq, gamma),
        }
    }

    /// Per-step decay factor of a running aggregate.
    pub fn decay(&self) -> f64 {
        match *self {
            Weighting::Counts => 1.0,
            Weighting::Exponential { gamma } => gamma,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub enum CommunitySource {
    #[default]
    MarkovClustering,
    Supplied(Partition),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitConfig {
    pub mcl: MclConfig,
    pub priors: Priors,
    pub weighting: Weighting,
    pub communities: CommunitySource,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: GbterParams,
    pub posterior: PosteriorState,
    /// Present when communities were detected rather than supplied.
    pub clustering: Option<MclOutcome>,
}

/// Fits communities, densities and expected degrees to a sequence.
pub fn fit_gbter(seq: &GraphSequence, cfg: &FitConfig) -> Result<FitResult> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (partition, clustering) = match &cfg.communities {
        CommunitySource::Supplied(p) => {
            if p.node_count() != seq.universe().len() {
                return Err(Error::UniverseMismatch);
            }
            (p.clone(), None)
        }
        CommunitySource::MarkovClustering => {
            let weights = cfg.weighting.aggregate(seq)?;
            let outcome = markov_cluster(&weights, &cfg.mcl)?;
            (outcome.partition.clone(), Some(outcome))
        }
    };
    let posterior = PosteriorState::fit(seq, partition, cfg.priors)?;
    let params = posterior.to_params()?;
    Ok(FitResult {
        params,
        posterior,
        clustering,
    })
}

/// Parameters and posteriors written together so a stream can resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub params: ParamsDocument,
    pub posterior: PosteriorDocument,
}

impl Checkpoint {
    pub fn new(params: &GbterParams, posterior: &PosteriorState) -> Self {
        Checkpoint {
            params: params.to_document(),
            posterior: posterior.to_document(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn restore(self) -> Result<(GbterParams, PosteriorState)> {
        Ok((
            GbterParams::from_document(self.params)?,
            PosteriorState::from_document(self.posterior)?,
        ))
    }
}
