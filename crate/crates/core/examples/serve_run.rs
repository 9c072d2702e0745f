//! Streams a sampled sequence through the detectors, writes the run to a
//! directory and serves it over HTTP until interrupted.
//!
//! ```text
//! cargo run --release --example serve_run -- [dir] [addr]
//! curl http://127.0.0.1:8080/api/snapshots
//! ```

use std::path::PathBuf;

use gbter_anomaly::cli::{cmd_stream, MANIFEST_FILE};
use gbter_anomaly::config::RunConfig;
use gbter_anomaly::experiments::build_experiment2;
use gbter_anomaly::graph::io::save_sequence;
use gbter_anomaly::{GraphSequence, SnapshotKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "gbter-demo".into()));
    let addr = std::env::args().nth(2).unwrap_or_else(|| "127.0.0.1:8080".into()).parse()?;
    std::fs::create_dir_all(&dir)?;

    let spec = build_experiment2();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut seq = GraphSequence::new(spec.regular.universe().clone());
    for t in 0..60 {
        let model = if t >= 50 && t % 5 == 4 { &spec.anomaly } else { &spec.regular };
        seq.push(SnapshotKey::Int(t), model.sample_graph(&mut rng))?;
    }
    let input = dir.join("sequence.json");
    save_sequence(&seq, &input)?;

    let cfg = RunConfig { mc_samples: 500, ..RunConfig::default() };
    let summary = tokio::task::spawn_blocking({
        let dir = dir.clone();
        move || cmd_stream(&input, 50, &cfg, &dir)
    })
    .await??;
    println!("{summary}");
    gbter_anomaly::service::serve(&dir.join(MANIFEST_FILE), addr).await
}
