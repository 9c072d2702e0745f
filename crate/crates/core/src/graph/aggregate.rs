use std::collections::BTreeMap;
use std::sync::Arc;

use super::{GraphSequence, LabeledGraph, Universe};
use crate::error::{Error, Result};

/// Symmetric non-negative pair weights. Zero weights are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAggregate {
    universe: Arc<Universe>,
    weights: BTreeMap<(usize, usize), f64>,
}

impl WeightedAggregate {
    pub fn new(universe: Arc<Universe>) -> Self {
        WeightedAggregate {
            universe,
            weights: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn node_count(&self) -> usize {
        self.universe.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.weights.get(&key).copied().unwrap_or(0.0)
    }

    /// Non-zero entries as `((i, j), w)` with `i < j`.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.weights.iter().map(|(&k, &w)| (k, w))
    }

    /// Multiplies every weight by `factor`, then adds `scale` on each edge of `g`.
    pub fn decay_and_add(&mut self, factor: f64, g: &LabeledGraph, scale: f64) {
        if factor != 1.0 {
            for w in self.weights.values_mut() {
                *w *= factor;
            }
            self.weights.retain(|_, w| *w > 0.0);
        }
        if scale > 0.0 {
            for e in g.edges() {
                *self.weights.entry(e).or_insert(0.0) += scale;
            }
        }
    }
}

/// Aggregates a sequence with a per-snapshot multiplier `multiplier(t, len)`.
pub fn aggregate_with<F>(seq: &GraphSequence, multiplier: F) -> Result<WeightedAggregate>
where
    F: Fn(usize, usize) -> f64,
{
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let len = seq.len();
    let mut agg = WeightedAggregate::new(seq.universe().clone());
    for (t, g) in seq.snapshots().iter().enumerate() {
        let m = multiplier(t, len);
        if m == 0.0 {
            continue;
        }
        for e in g.edges() {
            *agg.weights.entry(e).or_insert(0.0) += m;
        }
    }
    Ok(agg)
}

/// Weight of a pair is the number of snapshots containing it.
pub fn aggregate_counts(seq: &GraphSequence) -> Result<WeightedAggregate> {
    aggregate_with(seq, |_, _| 1.0)
}

/// Weight of a pair is `sum_t gamma^(T-1-t)` over the snapshots containing it;
/// the newest snapshot counts with weight 1.
pub fn aggregate_exponential(seq: &GraphSequence, gamma: f64) -> Result<WeightedAggregate> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    aggregate_with(seq, |t, len| gamma.powi((len - 1 - t) as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(n: usize, graphs: &[&[(usize, usize)]]) -> GraphSequence {
        let u = Arc::new(Universe::numbered(n));
        let gs = graphs
            .iter()
            .map(|e| LabeledGraph::from_edges(u.clone(), e.iter().copied()).unwrap())
            .collect();
        GraphSequence::from_graphs(u, gs).unwrap()
    }

    #[test]
    fn counts() {
        let s = seq(3, &[&[(0, 1)], &[(0, 1)]]);
        assert_eq!(aggregate_counts(&s).unwrap().weight(1, 0), 2.0);

        let s = seq(3, &[&[(0, 1)], &[(1, 2)]]);
        let a = aggregate_counts(&s).unwrap();
        assert_eq!(a.weight(0, 1), 1.0);
        assert_eq!(a.weight(1, 2), 1.0);
        assert_eq!(a.weight(0, 2), 0.0);

        let s = seq(3, &[&[]]);
        assert_eq!(aggregate_counts(&s).unwrap().entries().count(), 0);
    }

    #[test]
    fn empty_sequence_is_an_error() {
        let s = GraphSequence::new(Arc::new(Universe::numbered(2)));
        assert!(matches!(aggregate_counts(&s), Err(Error::EmptySequence)));
        assert!(matches!(aggregate_exponential(&s, 0.5), Err(Error::EmptySequence)));
    }

    #[test]
    fn exponential() {
        let s = seq(3, &[&[(0, 1), (0, 2)], &[(0, 1), (1, 2)]]);
        let a = aggregate_exponential(&s, 0.5).unwrap();
        assert_eq!(a.weight(0, 1), 1.5);
        assert_eq!(a.weight(0, 2), 0.5);
        assert_eq!(a.weight(1, 2), 1.0);

        let newest = aggregate_exponential(&s, 0.0).unwrap();
        assert_eq!(newest.weight(0, 1), 1.0);
        assert_eq!(newest.weight(0, 2), 0.0);
        assert_eq!(newest.weight(1, 2), 1.0);

        assert!(aggregate_exponential(&s, 1.0).is_err());
        assert!(aggregate_exponential(&s, -0.1).is_err());
    }

    #[test]
    fn decay_and_add_matches_closed_form() {
        let s = seq(3, &[&[(0, 1)], &[(1, 2)], &[(0, 1), (0, 2)]]);
        let mut running = WeightedAggregate::new(s.universe().clone());
        for g in s.snapshots() {
            running.decay_and_add(0.3, g, 1.0);
        }
        let closed = aggregate_exponential(&s, 0.3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((running.weight(i, j) - closed.weight(i, j)).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn counts_equal_unit_multipliers(masks in proptest::collection::vec(0u8..64, 1..6)) {
            let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
            let graphs: Vec<Vec<(usize, usize)>> = masks
                .iter()
                .map(|m| pairs.iter().enumerate().filter(|(k, _)| m >> k & 1 == 1).map(|(_, &p)| p).collect())
                .collect();
            let refs: Vec<&[(usize, usize)]> = graphs.iter().map(Vec::as_slice).collect();
            let s = seq(4, &refs);
            prop_assert_eq!(aggregate_counts(&s).unwrap(), aggregate_with(&s, |_, _| 1.0).unwrap());
        }
    }
}
