//! Scores every graph on three nodes under an Erdős-Rényi model with
//! `p = 1/3` using both likelihoods.
//!
//! The probability detector calls the empty graph the most typical outcome
//! and the triangle the least, so its Monte-Carlo p-value can never flag an
//! empty graph. The statistics detector scores degrees instead, and the empty
//! graph ties with the single-edge graphs it is as likely as.
//!
//! ```text
//! cargo run --release --example score_graphs
//! ```

use std::sync::Arc;

use gbter_anomaly::detectors::{graph_log_prob, mc_pvalue, stats_subgraph_log_prob};
use gbter_anomaly::{GbterParams, LabeledGraph, Partition, Universe};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let universe = Arc::new(Universe::numbered(3));
    let model = GbterParams::new(universe.clone(), Partition::new(3, vec![vec![0, 1, 2]])?, vec![1.0 / 3.0], vec![2.0 / 3.0; 3])?;
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let all = [0, 1, 2];

    println!("{:<25} {:>8} {:>8} {:>9} {:>9}", "edges", "P(G)", "P_stats", "p (prob)", "p (stats)");
    for mask in 0..8u32 {
        let edges: Vec<(usize, usize)> = (0..3).filter(|b| mask & (1 << b) != 0).map(|b| pairs[b]).collect();
        let g = LabeledGraph::from_edges(universe.clone(), edges.iter().copied())?;
        let prob = graph_log_prob(&model, &g)?;
        let stats = stats_subgraph_log_prob(&model, &g, &all, false)?;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p_prob = mc_pvalue(&model, prob, 5000, &mut rng, |s| graph_log_prob(&model, s).unwrap());
        let p_stats = mc_pvalue(&model, stats, 5000, &mut rng, |s| stats_subgraph_log_prob(&model, s, &all, false).unwrap());
        println!(
            "{:<25} {:>8.4} {:>8.4} {:>9.4} {:>9.4}",
            format!("{edges:?}"),
            prob.prob(),
            stats.prob(),
            p_prob,
            p_stats
        );
    }
    Ok(())
}
