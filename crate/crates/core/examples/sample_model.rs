//! Samples graphs from a two-block model and compares observed degrees with
//! the expected ones. With a path argument the sample is saved as a sequence
//! file usable by the `gbter` binary.
//!
//! ```text
//! cargo run --release --example sample_model -- [out.json]
//! ```

use std::sync::Arc;

use gbter_anomaly::graph::io::save_sequence;
use gbter_anomaly::{GbterParams, GraphSequence, Partition, SnapshotKey, Universe};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let universe = Arc::new(Universe::new(["ann", "bob", "cat", "dan", "eve", "fay", "gus", "hal"])?);
    let partition = Partition::new(8, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]])?;
    let model = GbterParams::new(universe.clone(), partition, vec![0.8, 0.6], vec![3.0, 3.0, 3.5, 4.0, 2.5, 2.5, 3.0, 5.0])?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut seq = GraphSequence::new(universe.clone());
    for t in 0..500 {
        seq.push(SnapshotKey::Int(t), model.sample_graph(&mut rng))?;
    }

    println!("{:<5} {:>9} {:>9} {:>7}", "node", "expected", "observed", "excess");
    let excess = model.excess_degrees();
    for (i, label) in universe.labels().iter().enumerate() {
        let mean = seq.snapshots().iter().map(|g| g.degree(i).unwrap() as f64).sum::<f64>() / seq.len() as f64;
        println!("{label:<5} {:>9.2} {:>9.2} {:>7.2}", model.expected_degree()[i], mean, excess[i]);
    }
    let clamped = model.validate_chung_lu();
    println!("pairs whose probability was clamped to 1: {}", clamped.len());

    if let Some(path) = std::env::args().nth(1) {
        save_sequence(&seq, &path)?;
        println!("wrote {} snapshots to {path}", seq.len());
    }
    Ok(())
}
