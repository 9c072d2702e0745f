//! Offline commands behind the `gbter` binary: fit a model, stream a
//! sequence through the detectors, and run the synthetic experiments.
//! Streaming runs leave a manifest that the read-only service loads.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::detectors::{AnomalyReport, DetectorKind, Pipeline};
use crate::error::{Error, Result};
use crate::experiments::{
    build_experiment1, build_experiment2, results_table, run_experiment, Evaluation, ExperimentSpec, Level,
    TableRow,
};
use crate::fitting::{fit_gbter, Checkpoint};
use crate::graph::io::load_any_sequence;
use crate::graph::{LabeledGraph, SnapshotKey};

pub const MANIFEST_FILE: &str = "manifest.json";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_file(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), format!("line {}", e.line()), e.to_string()))
}

/// Communities of a fitted model, for printing.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSummary {
    pub snapshots: usize,
    pub communities: Vec<(Vec<String>, f64)>,
    pub params_path: PathBuf,
    pub posterior_path: PathBuf,
}

impl fmt::Display for FitSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fitted {} snapshots: {} communities", self.snapshots, self.communities.len())?;
        for (c, (members, p)) in self.communities.iter().enumerate() {
            writeln!(f, "  {c:>3}  p = {p:.4}  {}", members.join(" "))?;
        }
        writeln!(f, "params:    {}", self.params_path.display())?;
        write!(f, "posterior: {}", self.posterior_path.display())
    }
}

/// Fits the model to a whole sequence and writes `params.json` and
/// `posterior.json` to `out`.
pub fn cmd_fit(sequence: &Path, cfg: &RunConfig, out: &Path) -> Result<FitSummary> {
    let seq = load_any_sequence(sequence)?;
    let pipeline = cfg.pipeline(seq.universe())?;
    let fit = fit_gbter(&seq, &pipeline.fit)?;
    create_dir(out)?;
    let checkpoint = Checkpoint::new(&fit.params, &fit.posterior);
    let params_path = out.join("params.json");
    let posterior_path = out.join("posterior.json");
    write_json(&params_path, &checkpoint.params)?;
    write_json(&posterior_path, &checkpoint.posterior)?;
    let communities = checkpoint
        .params
        .communities
        .iter()
        .cloned()
        .zip(fit.params.density().iter().copied())
        .collect();
    Ok(FitSummary {
        snapshots: seq.len(),
        communities,
        params_path,
        posterior_path,
    })
}

/// One streamed snapshot: its graph file and one report file per detector,
/// all relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub key: SnapshotKey,
    pub graph: String,
    pub reports: BTreeMap<DetectorKind, String>,
    pub graph_pvalues: BTreeMap<DetectorKind, f64>,
}

/// Everything needed to replay a streaming run and to serve its results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub input: PathBuf,
    pub train_prefix: usize,
    pub config: RunConfig,
    pub universe: Vec<String>,
    pub checkpoint: String,
    pub snapshots: Vec<SnapshotRecord>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path.as_ref())
    }
}

/// Edge set of one snapshot as stored next to its reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotGraph {
    pub key: SnapshotKey,
    pub edges: Vec<(String, String)>,
}

impl SnapshotGraph {
    pub fn from_graph(key: SnapshotKey, g: &LabeledGraph) -> Self {
        let labels = g.universe().labels();
        SnapshotGraph {
            key,
            edges: g.edges().map(|(i, j)| (labels[i].clone(), labels[j].clone())).collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path.as_ref())
    }
}

/// Per-snapshot graph p-values and flag counts of a streaming run.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSummary {
    pub manifest_path: PathBuf,
    pub rows: Vec<(SnapshotKey, Vec<AnomalyReport>)>,
}

impl fmt::Display for StreamSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<12} {:<9} {:>12} {:>5} {:>12} {:>12}",
            "snapshot", "detector", "graph p", "flag", "communities", "nodes"
        )?;
        for (key, reports) in &self.rows {
            for r in reports {
                let counts = |n: usize, total: usize| {
                    if r.detector.is_multiscale() {
                        format!("{n}/{total}")
                    } else {
                        "-".to_string()
                    }
                };
                writeln!(
                    f,
                    "{:<12} {:<9} {:>12.4e} {:>5} {:>12} {:>12}",
                    key.to_string(),
                    r.detector.name(),
                    r.graph_pvalue,
                    if r.graph_flagged { "*" } else { "" },
                    counts(r.flagged_communities().count(), r.communities.len()),
                    counts(r.flagged_nodes().count(), r.nodes.len()),
                )?;
            }
        }
        write!(f, "manifest: {}", self.manifest_path.display())
    }
}

/// Trains on the first `train_prefix` snapshots and scores the rest,
/// writing snapshots, reports, the final checkpoint and a manifest to `out`.
pub fn cmd_stream(sequence: &Path, train_prefix: usize, cfg: &RunConfig, out: &Path) -> Result<StreamSummary> {
    let seq = load_any_sequence(sequence)?;
    if train_prefix == 0 {
        return Err(Error::invalid("training prefix must hold at least one snapshot"));
    }
    if train_prefix >= seq.len() {
        return Err(Error::invalid(format!(
            "training prefix {train_prefix} covers all {} snapshots: nothing to detect",
            seq.len()
        )));
    }
    let mut pipeline = Pipeline::train(&seq.prefix(train_prefix), cfg.pipeline(seq.universe())?)?;
    create_dir(&out.join("snapshots"))?;
    create_dir(&out.join("reports"))?;

    let mut records = Vec::new();
    let mut rows = Vec::new();
    for t in train_prefix..seq.len() {
        let key = seq.keys()[t].clone();
        let g = &seq.snapshots()[t];
        let graph_file = format!("snapshots/{t:04}.json");
        write_json(&out.join(&graph_file), &SnapshotGraph::from_graph(key.clone(), g))?;
        let reports = pipeline.step(key.clone(), g)?;
        let mut files = BTreeMap::new();
        let mut pvalues = BTreeMap::new();
        for r in &reports {
            let file = format!("reports/{t:04}-{}.json", r.detector.name());
            r.save(out.join(&file))?;
            files.insert(r.detector, file);
            pvalues.insert(r.detector, r.graph_pvalue);
        }
        records.push(SnapshotRecord {
            key: key.clone(),
            graph: graph_file,
            reports: files,
            graph_pvalues: pvalues,
        });
        rows.push((key, reports));
    }

    let checkpoint = "checkpoint.json".to_string();
    Checkpoint::new(pipeline.params(), pipeline.posterior()).save(out.join(&checkpoint))?;
    let manifest = RunManifest {
        input: sequence.to_path_buf(),
        train_prefix,
        config: cfg.clone(),
        universe: seq.universe().labels().to_vec(),
        checkpoint,
        snapshots: records,
    };
    let manifest_path = out.join(MANIFEST_FILE);
    write_json(&manifest_path, &manifest)?;
    Ok(StreamSummary { manifest_path, rows })
}

pub fn experiment_spec(id: u32) -> Result<ExperimentSpec> {
    match id {
        1 => Ok(build_experiment1()),
        2 => Ok(build_experiment2()),
        other => Err(Error::invalid(format!("unknown experiment {other} (expected 1 or 2)"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub rows: Vec<TableRow>,
    pub table_path: PathBuf,
    pub roc_path: PathBuf,
    pub scores_path: PathBuf,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

impl fmt::Display for ExperimentSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:<9} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "level", "method", "alpha", "F1", "precision", "recall", "AUC"
        )?;
        for r in &self.rows {
            let c = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}"));
            writeln!(
                f,
                "{:<10} {:<9} {:>9} {:>9} {:>9} {:>9} {:>9}",
                r.level.name(),
                r.method.name(),
                c(r.alpha),
                c(r.f1),
                c(r.precision),
                c(r.recall),
                c(r.auc)
            )?;
        }
        write!(f, "table: {}\nroc:   {}", self.table_path.display(), self.roc_path.display())
    }
}

/// Runs experiment `id` under `cfg` (its seed drives the data and the
/// Monte-Carlo streams) and writes the results table, ROC points and raw
/// labeled scores to `out`.
pub fn cmd_experiment(id: u32, cfg: &RunConfig, out: &Path) -> Result<ExperimentSummary> {
    let spec = experiment_spec(id)?;
    let pipeline = cfg.pipeline(spec.regular.universe())?;
    let scores = run_experiment(&spec, &cfg.detectors, &pipeline, cfg.seed)?;
    let rows = results_table(&spec.name, &scores);
    create_dir(out)?;

    let mut table = csv::Writer::from_writer(Vec::new());
    table
        .write_record(["experiment", "level", "method", "alpha", "f1", "precision", "recall", "auc"])
        .and_then(|_| {
            rows.iter().try_for_each(|r| {
                table.write_record([
                    r.experiment.clone(),
                    r.level.name().to_string(),
                    r.method.name().to_string(),
                    cell(r.alpha),
                    cell(r.f1),
                    cell(r.precision),
                    cell(r.recall),
                    cell(r.auc),
                ])
            })
        })
        .map_err(|e| Error::invalid(e.to_string()))?;
    let table_text = String::from_utf8(table.into_inner().map_err(|e| Error::invalid(e.to_string()))?)
        .expect("csv output is utf-8");

    let mut roc = String::from("level,method,threshold,tpr,fpr\n");
    for level in Level::ALL {
        for &method in scores.scores.keys() {
            if let Some(Evaluation::Scored { curve, .. }) = scores.evaluate(method, level) {
                for p in &curve.points {
                    let _ = writeln!(roc, "{},{},{},{},{}", level.name(), method.name(), p.threshold, p.tpr, p.fpr);
                }
            }
        }
    }

    let stem = format!("experiment{id}");
    let table_path = out.join(format!("{stem}-table.csv"));
    let roc_path = out.join(format!("{stem}-roc.csv"));
    let scores_path = out.join(format!("{stem}-scores.json"));
    write_file(&table_path, &table_text)?;
    write_file(&roc_path, &roc)?;
    write_json(&scores_path, &scores.scores)?;
    Ok(ExperimentSummary {
        rows,
        table_path,
        roc_path,
        scores_path,
    })
}
