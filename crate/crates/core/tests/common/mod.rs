#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use gbter_anomaly::graph::io::save_sequence;
use gbter_anomaly::{GbterParams, GraphSequence, Partition, SnapshotKey, Universe};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two dense blocks of four with labels containing spaces.
pub fn two_cliques() -> GbterParams {
    let labels = ["North A", "North B", "North C", "North D", "South A", "South B", "South C", "South D"];
    GbterParams::new(
        Arc::new(Universe::new(labels).unwrap()),
        Partition::new(8, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap(),
        vec![0.9, 0.9],
        vec![3.4; 8],
    )
    .unwrap()
}

pub fn sample_sequence(model: &GbterParams, len: usize, seed: u64) -> GraphSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seq = GraphSequence::new(model.universe().clone());
    for t in 0..len {
        seq.push(SnapshotKey::Int(t as i64), model.sample_graph(&mut rng)).unwrap();
    }
    seq
}

pub fn write_sequence(dir: &Path, len: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join("sequence.json");
    save_sequence(&sample_sequence(&two_cliques(), len, seed), &path).unwrap();
    path
}
