//! Text formats for graphs and sequences.
//!
//! * Edge list: a `#nodes: A,B,C` header followed by one `A B` pair per line.
//!   Blank lines and other `#` lines are ignored.
//! * Sequence: `{"universe": [...], "snapshots": [{"t": key, "edges": [["A","B"], ...]}]}`.
//! * Season CSV: `season,team_a,team_b`, one row per game.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GraphSequence, LabeledGraph, SnapshotKey, Universe};
use crate::error::{Error, Result};

const NODES_HEADER: &str = "#nodes:";

pub fn parse_edge_list(text: &str, origin: &str) -> Result<LabeledGraph> {
    let mut graph: Option<LabeledGraph> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let at = format!("line {}", lineno + 1);
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(NODES_HEADER) {
            if graph.is_some() {
                return Err(Error::parse(origin, at, "repeated #nodes header"));
            }
            let labels: Vec<&str> = rest
                .split(',')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let universe = Universe::new(labels).map_err(|e| Error::parse(origin, &at, e.to_string()))?;
            graph = Some(LabeledGraph::empty(Arc::new(universe)));
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let g = graph
            .as_mut()
            .ok_or_else(|| Error::parse(origin, &at, "edge before #nodes header"))?;
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(Error::parse(origin, &at, "expected `LABEL LABEL`")),
        };
        let lookup = |l: &str| {
            g.universe()
                .index_of(l)
                .map_err(|e| Error::parse(origin, &at, e.to_string()))
        };
        let (i, j) = (lookup(a)?, lookup(b)?);
        g.insert_edge(i, j)
            .map_err(|e| Error::parse(origin, &at, e.to_string()))?;
    }
    graph.ok_or_else(|| Error::parse(origin, "line 1", "missing #nodes header"))
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains(',') || label.chars().any(char::is_whitespace) {
        return Err(Error::invalid(format!(
            "label `{label}` cannot be written to an edge list"
        )));
    }
    Ok(())
}

pub fn format_edge_list(g: &LabeledGraph) -> Result<String> {
    let labels = g.universe().labels();
    for l in labels {
        check_label(l)?;
    }
    let mut out = format!("{NODES_HEADER} {}\n", labels.join(","));
    for (i, j) in g.edges() {
        out.push_str(&labels[i]);
        out.push(' ');
        out.push_str(&labels[j]);
        out.push('\n');
    }
    Ok(out)
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<LabeledGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, &path.display().to_string())
}

pub fn save_edge_list(g: &LabeledGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_edge_list(g)?).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDocument {
    universe: Vec<String>,
    snapshots: Vec<SnapshotDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotDocument {
    t: SnapshotKey,
    edges: Vec<(String, String)>,
}

pub fn parse_sequence(text: &str, origin: &str) -> Result<GraphSequence> {
    let doc: SequenceDocument = serde_json::from_str(text).map_err(|e| {
        Error::parse(origin, format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    let universe = Arc::new(
        Universe::new(doc.universe).map_err(|e| Error::parse(origin, "universe", e.to_string()))?,
    );
    let mut seq = GraphSequence::new(universe.clone());
    for (s, snap) in doc.snapshots.into_iter().enumerate() {
        let mut g = LabeledGraph::empty(universe.clone());
        for (k, (a, b)) in snap.edges.iter().enumerate() {
            let at = || format!("snapshots[{s}].edges[{k}]");
            let i = universe
                .index_of(a)
                .map_err(|e| Error::parse(origin, at(), e.to_string()))?;
            let j = universe
                .index_of(b)
                .map_err(|e| Error::parse(origin, at(), e.to_string()))?;
            g.insert_edge(i, j)
                .map_err(|e| Error::parse(origin, at(), e.to_string()))?;
        }
        seq.push(snap.t, g)?;
    }
    Ok(seq)
}

pub fn format_sequence(seq: &GraphSequence) -> Result<String> {
    let labels = seq.universe().labels();
    let doc = SequenceDocument {
        universe: labels.to_vec(),
        snapshots: seq
            .iter()
            .map(|(t, g)| SnapshotDocument {
                t: t.clone(),
                edges: g
                    .edges()
                    .map(|(i, j)| (labels[i].clone(), labels[j].clone()))
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

pub fn load_sequence(path: impl AsRef<Path>) -> Result<GraphSequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequence(&text, &path.display().to_string())
}

pub fn save_sequence(seq: &GraphSequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_sequence(seq)?).map_err(|e| Error::io(path, e))
}

/// Reads `season,team_a,team_b` rows into one snapshot per season.
///
/// The universe is the sorted union of all teams, so a team missing from a
/// season is present there with degree 0. Repeated games collapse to one edge.
pub fn parse_seasons_csv(text: &str, origin: &str) -> Result<GraphSequence> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(origin, "line 1", e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::parse(origin, "line 1", format!("missing column `{name}`")))
    };
    let (cs, ca, cb) = (column("season")?, column("team_a")?, column("team_b")?);

    let mut games: BTreeMap<SnapshotKey, BTreeSet<(String, String)>> = BTreeMap::new();
    let mut teams = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(origin, format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let at = format!("line {line}");
        let field = |c: usize| {
            record
                .get(c)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| Error::parse(origin, &at, "empty field"))
        };
        let (season, a, b) = (field(cs)?, field(ca)?, field(cb)?);
        if a == b {
            return Err(Error::parse(origin, &at, format!("self-loop on `{a}`")));
        }
        let key = season
            .parse::<i64>()
            .map(SnapshotKey::Int)
            .unwrap_or_else(|_| SnapshotKey::Text(season.to_string()));
        let pair = if a < b { (a, b) } else { (b, a) };
        teams.insert(a.to_string());
        teams.insert(b.to_string());
        games
            .entry(key)
            .or_default()
            .insert((pair.0.to_string(), pair.1.to_string()));
    }
    if games.is_empty() {
        return Err(Error::EmptySequence);
    }
    let universe = Arc::new(Universe::new(teams)?);
    let mut seq = GraphSequence::new(universe.clone());
    for (key, pairs) in games {
        let g = LabeledGraph::from_label_pairs(
            universe.clone(),
            pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )?;
        seq.push(key, g)?;
    }
    Ok(seq)
}

pub fn load_seasons_csv(path: impl AsRef<Path>) -> Result<GraphSequence> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_seasons_csv(&text, &path.display().to_string())
}

/// Loads a sequence from JSON, or from season CSV when the extension is `.csv`.
pub fn load_any_sequence(path: impl AsRef<Path>) -> Result<GraphSequence> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => load_seasons_csv(path),
        _ => load_sequence(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn edge_list_basics() {
        let text = "# a comment\n#nodes: A,B,C\n\nA B\n# another\nC B\n";
        let g = parse_edge_list(text, "mem").unwrap();
        assert!(g.has_edge(0, 1));
        assert!(g.has_edge(1, 2));
        assert_eq!(g.edge_count(), 2);
        assert_eq!(format_edge_list(&g).unwrap(), "#nodes: A,B,C\nA B\nB C\n");
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        let err = parse_edge_list("#nodes: A,B\nA A\n", "f.txt").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("self-loop"), "{msg}");

        let msg = parse_edge_list("#nodes: A,B\nA B\nB A\n", "f.txt").unwrap_err().to_string();
        assert!(msg.contains("line 3") && msg.contains("duplicate"), "{msg}");

        let msg = parse_edge_list("#nodes: A,B\nA Z\n", "f.txt").unwrap_err().to_string();
        assert!(msg.contains("line 2") && msg.contains("Z"), "{msg}");

        assert!(parse_edge_list("A B\n", "f").is_err());
        assert!(parse_edge_list("#nodes: A,B\nA B C\n", "f").is_err());
        assert!(parse_edge_list("", "f").is_err());
    }

    #[test]
    fn canonical_edge_list_is_byte_stable() {
        let text = "#nodes: a,b,c,d\na b\na d\nb c\nc d\n";
        let g = parse_edge_list(text, "mem").unwrap();
        assert_eq!(format_edge_list(&g).unwrap(), text);
    }

    #[test]
    fn sequence_round_trip_and_errors() {
        let text = r#"{"universe": ["A","B","C"], "snapshots": [
            {"t": 2008, "edges": [["A","B"]]},
            {"t": "late", "edges": [["B","C"],["A","C"]]}]}"#;
        let seq = parse_sequence(text, "mem").unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.keys()[0], SnapshotKey::Int(2008));
        assert_eq!(seq.keys()[1], SnapshotKey::Text("late".into()));
        let again = parse_sequence(&format_sequence(&seq).unwrap(), "mem").unwrap();
        assert_eq!(seq, again);
        assert_eq!(format_sequence(&again).unwrap(), format_sequence(&seq).unwrap());

        let bad = r#"{"universe": ["A","B"], "snapshots": [{"t": 1, "edges": [["A","A"]]}]}"#;
        let msg = parse_sequence(bad, "s.json").unwrap_err().to_string();
        assert!(msg.contains("snapshots[0].edges[0]") && msg.contains("self-loop"), "{msg}");

        let msg = parse_sequence("{\"universe\": [", "s.json").unwrap_err().to_string();
        assert!(msg.contains("line 1"), "{msg}");
    }

    #[test]
    fn seasons_csv() {
        let text = "season,team_a,team_b\n2009,Utah,BYU\n2008,Utah,BYU\n2008,BYU,Utah\n2008,TCU,BYU\n";
        let seq = parse_seasons_csv(text, "games.csv").unwrap();
        assert_eq!(seq.keys(), &[SnapshotKey::Int(2008), SnapshotKey::Int(2009)]);
        assert_eq!(seq.universe().labels(), &["BYU", "TCU", "Utah"]);
        assert_eq!(seq.snapshots()[0].edge_count(), 2);
        assert_eq!(seq.snapshots()[1].edge_count(), 1);
        assert_eq!(seq.snapshots()[1].degree(1).unwrap(), 0);

        let msg = parse_seasons_csv("season,team_a,team_b\n2008,A,B\n2008,C,C\n", "g.csv")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 3") && msg.contains("self-loop"), "{msg}");
        assert!(parse_seasons_csv("year,a,b\n1,x,y\n", "g.csv").is_err());
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(n in 1usize..10, mask in any::<u64>()) {
            let u = Arc::new(Universe::new((0..n).map(|i| format!("v{i:02}"))).unwrap());
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if mask >> (k % 64) & 1 == 1 { edges.push((i, j)); }
                    k += 1;
                }
            }
            let g = LabeledGraph::from_edges(u, edges).unwrap();
            let text = format_edge_list(&g).unwrap();
            let back = parse_edge_list(&text, "mem").unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(format_edge_list(&back).unwrap(), text);
        }
    }
}
