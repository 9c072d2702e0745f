//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! mc_samples = 2000
//! detectors = ["prob", "stats", "baseline"]
//! recluster_every = 1
//!
//! [thresholds]
//! graph = 0.01
//! community = 0.01
//! node = 1e-6
//!
//! [weighting]
//! kind = "exponential"
//! gamma = 0.5
//!
//! [mcl]
//! inflation = 2.0
//! ```
//!
//! Every key is optional. `communities`, a list of label lists, replaces
//! community detection with a fixed partition.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detectors::{DetectorConfig, DetectorKind, PipelineConfig, Thresholds};
use crate::error::{Error, Result};
use crate::fitting::{CommunitySource, FitConfig, MclConfig, Priors, Weighting};
use crate::graph::Universe;
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub mc_samples: usize,
    pub truncate_poisson: bool,
    pub update_with_anomalies: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recluster_every: Option<usize>,
    pub detectors: Vec<DetectorKind>,
    pub thresholds: Thresholds,
    pub priors: Priors,
    pub mcl: MclConfig,
    pub weighting: Weighting,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub communities: Option<Vec<Vec<String>>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let detector = DetectorConfig::default();
        let pipeline = PipelineConfig::default();
        RunConfig {
            seed: detector.seed,
            mc_samples: detector.mc_samples,
            truncate_poisson: detector.truncate_poisson,
            update_with_anomalies: pipeline.update_with_anomalies,
            recluster_every: pipeline.recluster_every,
            detectors: pipeline.detectors,
            thresholds: detector.thresholds,
            priors: Priors::default(),
            mcl: MclConfig::default(),
            weighting: Weighting::default(),
            communities: None,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let location = e
                .span()
                .map(|s| format!("line {}", text[..s.start].matches('\n').count() + 1))
                .unwrap_or_else(|| "config".into());
            Error::parse(origin, location, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if let Weighting::Exponential { gamma } = self.weighting {
            if !(0.0..1.0).contains(&gamma) {
                return Err(Error::invalid(format!("weighting gamma {gamma} is outside [0, 1)")));
            }
        }
        self.pipeline_with(CommunitySource::MarkovClustering).validate()
    }

    fn pipeline_with(&self, communities: CommunitySource) -> PipelineConfig {
        PipelineConfig {
            fit: FitConfig {
                mcl: self.mcl,
                priors: self.priors,
                weighting: self.weighting,
                communities,
            },
            detector: DetectorConfig {
                mc_samples: self.mc_samples,
                seed: self.seed,
                thresholds: self.thresholds,
                truncate_poisson: self.truncate_poisson,
            },
            detectors: self.detectors.clone(),
            update_with_anomalies: self.update_with_anomalies,
            recluster_every: self.recluster_every,
        }
    }

    /// Pipeline settings, resolving any fixed communities against `universe`.
    pub fn pipeline(&self, universe: &Universe) -> Result<PipelineConfig> {
        let source = match &self.communities {
            None => CommunitySource::MarkovClustering,
            Some(blocks) => {
                let blocks = blocks
                    .iter()
                    .map(|b| b.iter().map(|l| universe.index_of(l)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                CommunitySource::Supplied(Partition::new(universe.len(), blocks)?)
            }
        };
        Ok(self.pipeline_with(source))
    }
}
