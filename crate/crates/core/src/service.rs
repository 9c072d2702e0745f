//! Read-only JSON API over the files of a streaming run.
//!
//! | route | payload |
//! |---|---|
//! | `GET /api/snapshots` | snapshot keys with graph p-values per detector |
//! | `GET /api/snapshots/{t}/communities` | community ids, members, p-values |
//! | `GET /api/snapshots/{t}/communities/{c}/subgraph` | members, their neighbours and incident edges |
//! | `GET /api/snapshots/{t}/nodes/{label}` | degrees, community and p-values of one node |
//!
//! Community and node routes take an optional `?detector=` (default: the
//! statistics detector when present). Everything is loaded once at startup.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::cli::{RunManifest, SnapshotGraph};
use crate::detectors::{AnomalyReport, CommunityEntry, DetectorKind, NodeEntry};
use crate::error::{Error, Result};
use crate::graph::SnapshotKey;

struct Snapshot {
    key: SnapshotKey,
    edges: Vec<(String, String)>,
    reports: BTreeMap<DetectorKind, AnomalyReport>,
}

/// Immutable contents of a run, shared by all requests.
pub struct RunData {
    snapshots: Vec<Snapshot>,
    by_key: BTreeMap<String, usize>,
}

impl RunData {
    pub fn load(manifest_path: impl AsRef<Path>) -> Result<Self> {
        let manifest_path = manifest_path.as_ref();
        let manifest = RunManifest::load(manifest_path)?;
        let root = manifest_path.parent().unwrap_or(Path::new("."));
        let mut snapshots = Vec::new();
        let mut by_key = BTreeMap::new();
        for (t, record) in manifest.snapshots.iter().enumerate() {
            let graph = SnapshotGraph::load(root.join(&record.graph))?;
            let mut reports = BTreeMap::new();
            for (&kind, file) in &record.reports {
                reports.insert(kind, AnomalyReport::load(root.join(file))?);
            }
            if by_key.insert(record.key.to_string(), t).is_some() {
                return Err(Error::invalid(format!("duplicate snapshot key `{}`", record.key)));
            }
            snapshots.push(Snapshot {
                key: record.key.clone(),
                edges: graph.edges,
                reports,
            });
        }
        Ok(RunData { snapshots, by_key })
    }
}

#[derive(Debug)]
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn not_found(msg: String) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, msg)
}

fn bad_request(msg: String) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg)
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
struct DetectorQuery {
    detector: Option<String>,
}

impl RunData {
    fn snapshot(&self, key: &str) -> std::result::Result<&Snapshot, ApiError> {
        self.by_key
            .get(key)
            .map(|&t| &self.snapshots[t])
            .ok_or_else(|| not_found(format!("unknown snapshot `{key}`")))
    }
}

impl Snapshot {
    /// The requested multi-scale report, or the default one.
    fn report(&self, query: &DetectorQuery) -> std::result::Result<&AnomalyReport, ApiError> {
        let kind = match &query.detector {
            Some(name) => {
                let kind: DetectorKind = name.parse().map_err(|e: Error| bad_request(e.to_string()))?;
                if !kind.is_multiscale() {
                    return Err(bad_request(format!("detector `{kind}` has no community or node scores")));
                }
                kind
            }
            None => [DetectorKind::Stats, DetectorKind::Prob]
                .into_iter()
                .find(|k| self.reports.contains_key(k))
                .ok_or_else(|| not_found(format!("snapshot `{}` has no multi-scale report", self.key)))?,
        };
        self.reports
            .get(&kind)
            .ok_or_else(|| not_found(format!("detector `{kind}` did not run on snapshot `{}`", self.key)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub key: SnapshotKey,
    pub graph_pvalues: BTreeMap<DetectorKind, f64>,
    pub graph_flagged: BTreeMap<DetectorKind, bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitiesPayload {
    pub snapshot: SnapshotKey,
    pub detector: DetectorKind,
    pub communities: Vec<CommunityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphNode {
    #[serde(flatten)]
    pub node: NodeEntry,
    /// Whether the node belongs to the requested community rather than
    /// being a neighbour of one of its members.
    pub member: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphPayload {
    pub snapshot: SnapshotKey,
    pub detector: DetectorKind,
    pub community: CommunityEntry,
    pub nodes: Vec<SubgraphNode>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodePayload {
    pub snapshot: SnapshotKey,
    pub label: String,
    pub community: usize,
    pub degree: usize,
    pub d_in: usize,
    pub d_ex: usize,
    pub pvalues: BTreeMap<DetectorKind, f64>,
    pub flagged: BTreeMap<DetectorKind, bool>,
}

async fn list_snapshots(State(data): State<Arc<RunData>>) -> Json<Vec<SnapshotSummary>> {
    Json(
        data.snapshots
            .iter()
            .map(|s| SnapshotSummary {
                key: s.key.clone(),
                graph_pvalues: s.reports.iter().map(|(&k, r)| (k, r.graph_pvalue)).collect(),
                graph_flagged: s.reports.iter().map(|(&k, r)| (k, r.graph_flagged)).collect(),
            })
            .collect(),
    )
}

async fn communities(
    State(data): State<Arc<RunData>>,
    UrlPath(key): UrlPath<String>,
    Query(query): Query<DetectorQuery>,
) -> ApiResult<CommunitiesPayload> {
    let snapshot = data.snapshot(&key)?;
    let report = snapshot.report(&query)?;
    Ok(Json(CommunitiesPayload {
        snapshot: snapshot.key.clone(),
        detector: report.detector,
        communities: report.communities.clone(),
    }))
}

async fn subgraph(
    State(data): State<Arc<RunData>>,
    UrlPath((key, community)): UrlPath<(String, String)>,
    Query(query): Query<DetectorQuery>,
) -> ApiResult<SubgraphPayload> {
    let id: usize = community
        .parse()
        .map_err(|_| bad_request(format!("community id `{community}` is not a non-negative integer")))?;
    let snapshot = data.snapshot(&key)?;
    let report = snapshot.report(&query)?;
    let entry = report
        .communities
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| not_found(format!("unknown community {id} in snapshot `{key}`")))?;
    let members: BTreeSet<&str> = entry.members.iter().map(String::as_str).collect();
    let edges: Vec<(String, String)> = snapshot
        .edges
        .iter()
        .filter(|(a, b)| members.contains(a.as_str()) || members.contains(b.as_str()))
        .cloned()
        .collect();
    let touched: BTreeSet<&str> = edges
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .chain(members.iter().copied())
        .collect();
    let nodes = report
        .nodes
        .iter()
        .filter(|n| touched.contains(n.label.as_str()))
        .map(|n| SubgraphNode {
            node: n.clone(),
            member: members.contains(n.label.as_str()),
        })
        .collect();
    Ok(Json(SubgraphPayload {
        snapshot: snapshot.key.clone(),
        detector: report.detector,
        community: entry.clone(),
        nodes,
        edges,
    }))
}

async fn node(
    State(data): State<Arc<RunData>>,
    UrlPath((key, label)): UrlPath<(String, String)>,
    Query(query): Query<DetectorQuery>,
) -> ApiResult<NodePayload> {
    let snapshot = data.snapshot(&key)?;
    let report = snapshot.report(&query)?;
    let entry = report
        .node(&label)
        .ok_or_else(|| not_found(format!("unknown node `{label}`")))?;
    let mut pvalues = BTreeMap::new();
    let mut flagged = BTreeMap::new();
    for (&kind, r) in &snapshot.reports {
        if let Some(n) = r.node(&label) {
            pvalues.insert(kind, n.pvalue);
            flagged.insert(kind, n.flagged);
        }
    }
    Ok(Json(NodePayload {
        snapshot: snapshot.key.clone(),
        label: entry.label.clone(),
        community: entry.community,
        degree: entry.degree,
        d_in: entry.d_in,
        d_ex: entry.d_ex,
        pvalues,
        flagged,
    }))
}

async fn fallback() -> ApiError {
    not_found("no such route".into())
}

pub fn router(data: Arc<RunData>) -> Router {
    Router::new()
        .route("/api/snapshots", get(list_snapshots))
        .route("/api/snapshots/{t}/communities", get(communities))
        .route("/api/snapshots/{t}/communities/{c}/subgraph", get(subgraph))
        .route("/api/snapshots/{t}/nodes/{label}", get(node))
        .fallback(fallback)
        .with_state(data)
}

/// Loads the run behind `manifest_path` and serves it until the process ends.
pub async fn serve(manifest_path: &Path, addr: SocketAddr) -> anyhow::Result<()> {
    let data = Arc::new(RunData::load(manifest_path)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("serving {} on http://{}", manifest_path.display(), listener.local_addr()?);
    axum::serve(listener, router(data)).await?;
    Ok(())
}
