//! Trains a pipeline on a regular stream, then feeds it a mix of regular
//! graphs and graphs in which two communities swap members, printing the
//! flagged graphs, communities and nodes per detector.
//!
//! ```text
//! cargo run --release --example stream_detection
//! ```

use gbter_anomaly::detectors::{Pipeline, PipelineConfig};
use gbter_anomaly::experiments::build_experiment2;
use gbter_anomaly::{GraphSequence, SnapshotKey};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let spec = build_experiment2();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let training = (0..spec.train_count).map(|_| spec.regular.sample_graph(&mut rng)).collect();
    let training = GraphSequence::from_graphs(spec.regular.universe().clone(), training)?;

    let mut pipeline = Pipeline::train(&training, PipelineConfig::default())?;
    println!(
        "trained on {} graphs: {} communities",
        training.len(),
        pipeline.partition().len()
    );
    println!("perturbed nodes: {:?}", spec.truth.nodes);

    for t in 0..6 {
        let anomalous = t % 3 == 2;
        let model = if anomalous { &spec.anomaly } else { &spec.regular };
        let g = model.sample_graph(&mut rng);
        println!("\nstep {t} ({})", if anomalous { "anomalous" } else { "regular" });
        for report in pipeline.step(SnapshotKey::Int(t), &g)? {
            let communities: Vec<usize> = report.flagged_communities().map(|c| c.id).collect();
            let nodes: Vec<&str> = report.flagged_nodes().map(|n| n.label.as_str()).collect();
            println!(
                "  {:<8} graph p {:.4}{}  communities {communities:?}  nodes {nodes:?}",
                report.detector.name(),
                report.graph_pvalue,
                if report.graph_flagged { " *" } else { "  " },
            );
        }
    }
    Ok(())
}
