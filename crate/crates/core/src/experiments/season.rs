//! Season-by-season study of a league whose teams occasionally change
//! conference: seasons are snapshots, games are edges, and conference
//! tables provide the ground truth for communities and teams.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detectors::{AnomalyReport, DetectorKind, Pipeline, PipelineConfig, Thresholds};
use crate::error::{Error, Result};
use crate::fitting::Weighting;
use crate::graph::{GraphSequence, SnapshotKey, Universe};
use crate::model::GbterParams;
use crate::partition::Partition;

/// Team to conference, per season.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConferenceTable {
    seasons: BTreeMap<i64, BTreeMap<String, String>>,
}

#[derive(Debug, Deserialize)]
struct ConferenceRow {
    season: i64,
    team: String,
    conference: String,
}

impl ConferenceTable {
    pub fn insert(&mut self, season: i64, team: &str, conference: &str) {
        self.seasons
            .entry(season)
            .or_default()
            .insert(team.to_string(), conference.to_string());
    }

    pub fn conference(&self, season: i64, team: &str) -> Option<&str> {
        self.seasons.get(&season)?.get(team).map(String::as_str)
    }

    pub fn seasons(&self) -> impl Iterator<Item = i64> + '_ {
        self.seasons.keys().copied()
    }

    fn members(&self, season: i64) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        if let Some(teams) = self.seasons.get(&season) {
            for (team, conf) in teams {
                out.entry(conf.as_str()).or_default().insert(team.as_str());
            }
        }
        out
    }

    /// Teams whose conference differs from the previous season, including
    /// teams that joined or left the table.
    pub fn movers(&self, season: i64, previous: i64) -> BTreeSet<String> {
        let empty = BTreeMap::new();
        let now = self.seasons.get(&season).unwrap_or(&empty);
        let before = self.seasons.get(&previous).unwrap_or(&empty);
        now.keys()
            .chain(before.keys())
            .filter(|t| now.get(*t) != before.get(*t))
            .cloned()
            .collect()
    }

    /// Conferences whose membership differs from the previous season.
    pub fn changed_conferences(&self, season: i64, previous: i64) -> BTreeSet<String> {
        let now = self.members(season);
        let before = self.members(previous);
        now.keys()
            .chain(before.keys())
            .filter(|c| now.get(*c) != before.get(*c))
            .map(|c| c.to_string())
            .collect()
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut table = ConferenceTable::default();
        for (k, row) in reader.deserialize::<ConferenceRow>().enumerate() {
            let row = row.map_err(|e| Error::parse(origin, format!("line {}", k + 2), e.to_string()))?;
            table.insert(row.season, &row.team, &row.conference);
        }
        Ok(table)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }
}

/// Pipeline settings for season data: communities re-detected every season
/// from exponentially down-weighted history.
pub fn season_config() -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.fit.weighting = Weighting::Exponential { gamma: 0.5 };
    cfg.recluster_every = Some(1);
    cfg.detectors = vec![DetectorKind::Stats, DetectorKind::Baseline];
    cfg.detector.thresholds = Thresholds {
        graph: 0.01,
        community: 0.01,
        node: 1e-6,
    };
    cfg
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonOutcome {
    pub season: i64,
    pub graph_pvalue: f64,
    /// Flagged communities whose majority conference changed membership.
    pub community_true_positives: usize,
    pub community_false_positives: usize,
    pub community_false_negatives: usize,
    pub movers: BTreeSet<String>,
    /// Teams at or below the node threshold.
    pub flagged_teams: BTreeSet<String>,
}

impl SeasonOutcome {
    pub fn nodes_separated(&self) -> bool {
        self.movers == self.flagged_teams
    }
}

/// Conference holding most members of a community (alphabetically first on
/// ties); `None` when no member is listed.
fn majority_conference(table: &ConferenceTable, season: i64, members: &[String]) -> Option<String> {
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    for m in members {
        if let Some(c) = table.conference(season, m) {
            *count.entry(c).or_default() += 1;
        }
    }
    let best = count.values().copied().max()?;
    count.into_iter().find(|&(_, v)| v == best).map(|(c, _)| c.to_string())
}

/// Scores one statistics report against the conference tables.
pub fn evaluate_season(
    report: &AnomalyReport,
    table: &ConferenceTable,
    season: i64,
    previous: i64,
    node_alpha: f64,
) -> SeasonOutcome {
    let changed = table.changed_conferences(season, previous);
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for c in &report.communities {
        let positive = majority_conference(table, season, &c.members).is_some_and(|conf| changed.contains(&conf));
        match (c.flagged, positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let present: BTreeSet<&str> = report.nodes.iter().map(|n| n.label.as_str()).collect();
    SeasonOutcome {
        season,
        graph_pvalue: report.graph_pvalue,
        community_true_positives: tp,
        community_false_positives: fp,
        community_false_negatives: fn_,
        movers: table
            .movers(season, previous)
            .into_iter()
            .filter(|t| present.contains(t.as_str()))
            .collect(),
        flagged_teams: report
            .nodes
            .iter()
            .filter(|n| n.pvalue <= node_alpha)
            .map(|n| n.label.clone())
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonStudy {
    pub outcomes: Vec<SeasonOutcome>,
}

impl SeasonStudy {
    pub fn least_anomalous(&self) -> Option<i64> {
        self.outcomes
            .iter()
            .max_by(|a, b| a.graph_pvalue.total_cmp(&b.graph_pvalue).then(b.season.cmp(&a.season)))
            .map(|o| o.season)
    }

    pub fn community_precision(&self) -> f64 {
        let tp: usize = self.outcomes.iter().map(|o| o.community_true_positives).sum();
        let fp: usize = self.outcomes.iter().map(|o| o.community_false_positives).sum();
        if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        }
    }

    pub fn community_recall(&self) -> f64 {
        let tp: usize = self.outcomes.iter().map(|o| o.community_true_positives).sum();
        let fn_: usize = self.outcomes.iter().map(|o| o.community_false_negatives).sum();
        if tp + fn_ == 0 {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        }
    }
}

/// Trains on the first `train_len` seasons, streams the rest through the
/// statistics detector and evaluates each against `table`.
pub fn run_season_study(
    seq: &GraphSequence,
    train_len: usize,
    cfg: &PipelineConfig,
    table: &ConferenceTable,
) -> Result<SeasonStudy> {
    if train_len == 0 || train_len >= seq.len() {
        return Err(Error::invalid(format!(
            "training prefix {train_len} leaves nothing to detect in {} seasons",
            seq.len()
        )));
    }
    let mut cfg = cfg.clone();
    if !cfg.detectors.contains(&DetectorKind::Stats) {
        cfg.detectors.push(DetectorKind::Stats);
    }
    let mut pipeline = Pipeline::train(&seq.prefix(train_len), cfg.clone())?;
    let mut outcomes = Vec::new();
    for t in train_len..seq.len() {
        let key = seq.keys()[t].clone();
        let (SnapshotKey::Int(season), SnapshotKey::Int(previous)) = (&key, &seq.keys()[t - 1]) else {
            return Err(Error::invalid("season keys must be integers"));
        };
        let (season, previous) = (*season, *previous);
        let reports = pipeline.step(key, &seq.snapshots()[t])?;
        let stats = reports
            .iter()
            .find(|r| r.detector == DetectorKind::Stats)
            .expect("statistics detector enabled");
        outcomes.push(evaluate_season(stats, table, season, previous, cfg.detector.thresholds.node));
    }
    Ok(SeasonStudy { outcomes })
}

/// A league whose schedules follow a block model of its conferences.
#[derive(Debug, Clone)]
pub struct SyntheticLeague {
    pub seasons: GraphSequence,
    pub conferences: ConferenceTable,
}

/// Six conferences of ten teams over seasons 2000 to 2012; three teams change
/// conference in 2011 and two in 2012.
pub fn synthetic_league(seed: u64) -> SyntheticLeague {
    const CONFERENCES: [&str; 6] = ["Atlantic", "Border", "Coastal", "Delta", "Eastern", "Frontier"];
    let teams: Vec<String> = (0..60).map(|t| format!("team{t:02}")).collect();
    let universe = Arc::new(Universe::new(teams.iter().cloned()).expect("distinct team names"));
    let mut assignment: Vec<usize> = (0..60).map(|t| t / 10).collect();
    let moves: BTreeMap<i64, Vec<(usize, usize)>> =
        BTreeMap::from([(2011, vec![(3, 1), (14, 2), (25, 0)]), (2012, vec![(41, 5), (52, 3)])]);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seasons = GraphSequence::new(universe.clone());
    let mut conferences = ConferenceTable::default();
    for season in 2000..=2012 {
        for &(team, conf) in moves.get(&season).map(Vec::as_slice).unwrap_or(&[]) {
            assignment[team] = conf;
        }
        for (t, &c) in assignment.iter().enumerate() {
            conferences.insert(season, &teams[t], CONFERENCES[c]);
        }
        let partition = Partition::from_assignment(&assignment).expect("every conference populated");
        let k = partition.len();
        let model = GbterParams::new(universe.clone(), partition, vec![0.85; k], vec![12.0; 60])
            .expect("valid league model");
        seasons
            .push(SnapshotKey::Int(season), model.sample_graph(&mut rng))
            .expect("shared universe");
    }
    SyntheticLeague { seasons, conferences }
}
