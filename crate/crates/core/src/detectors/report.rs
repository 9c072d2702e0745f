use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BaselineStats;
use crate::error::{Error, Result};
use crate::graph::SnapshotKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    /// Multi-scale probability detector.
    Prob,
    /// Multi-scale statistics detector.
    Stats,
    /// Gaussian baseline, graph level only.
    Baseline,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::Prob, DetectorKind::Stats, DetectorKind::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Prob => "prob",
            DetectorKind::Stats => "stats",
            DetectorKind::Baseline => "baseline",
        }
    }

    /// Whether the detector scores communities and nodes.
    pub fn is_multiscale(self) -> bool {
        self != DetectorKind::Baseline
    }

    /// Parses a comma-separated list such as `prob,stats`.
    pub fn parse_list(text: &str) -> Result<Vec<DetectorKind>> {
        let mut out: Vec<DetectorKind> = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let kind = part.parse()?;
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        if out.is_empty() {
            return Err(Error::invalid("no detectors selected"));
        }
        Ok(out)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob" | "probability" => Ok(DetectorKind::Prob),
            "stats" | "statistics" => Ok(DetectorKind::Stats),
            "baseline" | "gaussian" => Ok(DetectorKind::Baseline),
            other => Err(Error::invalid(format!(
                "unknown detector `{other}` (expected prob, stats or baseline)"
            ))),
        }
    }
}

/// Per-level significance thresholds. A p-value is flagged when it is at
/// most the threshold, except that a threshold of 0 flags nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub graph: f64,
    pub community: f64,
    pub node: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            graph: 0.01,
            community: 0.01,
            node: 0.01,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("graph", self.graph), ("community", self.community), ("node", self.node)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::invalid(format!("{name} threshold {a} is outside [0, 1]")));
            }
        }
        Ok(())
    }
}

pub fn is_flagged(pvalue: f64, alpha: f64) -> bool {
    alpha > 0.0 && pvalue <= alpha
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Monte-Carlo samples per step.
    pub mc_samples: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
    /// Renormalize the external-degree Poisson over `0..n`.
    pub truncate_poisson: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            mc_samples: 2000,
            seed: 0,
            thresholds: Thresholds::default(),
            truncate_poisson: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mc_samples == 0 {
            return Err(Error::invalid("mc_samples must be at least 1"));
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityEntry {
    pub id: usize,
    pub members: Vec<String>,
    pub pvalue: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub label: String,
    pub community: usize,
    pub degree: usize,
    pub d_in: usize,
    pub d_ex: usize,
    pub pvalue: f64,
    pub flagged: bool,
}

/// Result of one detector on one snapshot.
///
/// Baseline reports carry only the graph level; their `communities` and
/// `nodes` are empty and `stats` holds the three observed statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub detector: DetectorKind,
    pub snapshot: SnapshotKey,
    pub thresholds: Thresholds,
    pub graph_pvalue: f64,
    pub graph_flagged: bool,
    pub communities: Vec<CommunityEntry>,
    pub nodes: Vec<NodeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<BaselineStats>,
}

impl AnomalyReport {
    pub fn flagged_communities(&self) -> impl Iterator<Item = &CommunityEntry> {
        self.communities.iter().filter(|c| c.flagged)
    }

    pub fn flagged_nodes(&self) -> impl Iterator<Item = &NodeEntry> {
        self.nodes.iter().filter(|n| n.flagged)
    }

    pub fn node(&self, label: &str) -> Option<&NodeEntry> {
        self.nodes.iter().find(|n| n.label == label)
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
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detector_names_round_trip() {
        for k in DetectorKind::ALL {
            assert_eq!(k.name().parse::<DetectorKind>().unwrap(), k);
        }
        assert_eq!(
            DetectorKind::parse_list("stats, prob,stats").unwrap(),
            vec![DetectorKind::Stats, DetectorKind::Prob]
        );
        assert!(DetectorKind::parse_list("").is_err());
        assert!("spectral".parse::<DetectorKind>().is_err());
    }

    #[test]
    fn threshold_extremes() {
        for p in [0.0, 1e-9, 0.3, 1.0] {
            assert!(!is_flagged(p, 0.0));
            assert!(is_flagged(p, 1.0));
        }
        assert!(is_flagged(0.01, 0.01));
        assert!(!is_flagged(0.011, 0.01));
        assert!(Thresholds { graph: 1.5, ..Thresholds::default() }.validate().is_err());
        assert!(DetectorConfig { mc_samples: 0, ..DetectorConfig::default() }.validate().is_err());
    }

    #[test]
    fn report_json_round_trip() {
        let r = AnomalyReport {
            detector: DetectorKind::Stats,
            snapshot: SnapshotKey::Int(2011),
            thresholds: Thresholds::default(),
            graph_pvalue: 0.004,
            graph_flagged: true,
            communities: vec![CommunityEntry { id: 0, members: vec!["a".into()], pvalue: 0.5, flagged: false }],
            nodes: vec![NodeEntry {
                label: "a".into(),
                community: 0,
                degree: 2,
                d_in: 0,
                d_ex: 2,
                pvalue: 1e-7,
                flagged: true,
            }],
            stats: None,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("stats\":"));
        assert_eq!(serde_json::from_str::<AnomalyReport>(&json).unwrap(), r);
        assert_eq!(r.flagged_nodes().count(), 1);
        assert_eq!(r.node("a").unwrap().d_ex, 2);
    }
}
