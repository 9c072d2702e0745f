//! The Gaussian baseline: average degree, average clustering coefficient and
//! the spectral norm of `A - E(A)`, each compared with its running mean and
//! standard deviation.
//!
//! ```text
//! cargo run --release --example gaussian_baseline
//! ```

use gbter_anomaly::detectors::{baseline_stats, GaussianBaselineState};
use gbter_anomaly::experiments::build_experiment1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let spec = build_experiment1();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut state = GaussianBaselineState::new();
    for _ in 0..100 {
        let g = spec.regular.sample_graph(&mut rng);
        state.observe(&baseline_stats(&g, &spec.regular)?);
    }
    let mean = state.mean();
    let sd = state.std_dev().expect("two or more observations");
    println!("after {} graphs:", state.count());
    for (name, k) in [("average degree", 0), ("clustering", 1), ("spectral norm", 2)] {
        println!("  {name:<15} mean {:>7.3}  sd {:>6.3}", mean[k], sd[k]);
    }

    for (label, model) in [("regular", &spec.regular), ("anomalous", &spec.anomaly)] {
        let g = model.sample_graph(&mut rng);
        let stats = baseline_stats(&g, &spec.regular)?;
        println!(
            "{label:<9} x1 {:.3} x2 {:.3} x3 {:.3}  p = {:.4}",
            stats.x1,
            stats.x2,
            stats.x3,
            state.pvalue(&stats)?
        );
    }
    Ok(())
}
