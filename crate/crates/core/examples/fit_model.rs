//! Recovers communities, densities and expected degrees from a sampled
//! stream: Markov clustering on the aggregated graph, then conjugate
//! posterior modes.
//!
//! ```text
//! cargo run --release --example fit_model
//! ```

use gbter_anomaly::experiments::build_experiment1;
use gbter_anomaly::fitting::{fit_gbter, FitConfig};
use gbter_anomaly::GraphSequence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let truth = build_experiment1().regular;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let graphs = (0..200).map(|_| truth.sample_graph(&mut rng)).collect();
    let seq = GraphSequence::from_graphs(truth.universe().clone(), graphs)?;

    let fit = fit_gbter(&seq, &FitConfig::default())?;
    let mcl = fit.clustering.as_ref().expect("communities were clustered");
    println!(
        "MCL: {} communities after {} iterations (converged: {}), partition recovered: {}",
        fit.params.partition().len(),
        mcl.iterations,
        mcl.converged,
        fit.params.partition() == truth.partition()
    );
    for (c, members) in fit.params.partition().communities().iter().enumerate() {
        println!("  community {c}: {members:?} density {:.3}", fit.params.density()[c]);
    }
    let err: Vec<f64> = fit
        .params
        .expected_degree()
        .iter()
        .zip(truth.expected_degree())
        .map(|(a, b)| (a - b).abs())
        .collect();
    println!(
        "expected degree: mean abs error {:.3}, max {:.3}",
        err.iter().sum::<f64>() / err.len() as f64,
        err.iter().cloned().fold(0.0, f64::max)
    );
    Ok(())
}
