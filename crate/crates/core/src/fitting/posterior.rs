use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{same_universe, GraphSequence, LabeledGraph, Universe};
use crate::model::GbterParams;
use crate::partition::Partition;

/// Beta posterior over one community's internal density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPosterior {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaPosterior {
    pub fn prior(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "Beta prior needs alpha, beta > 0 (got {alpha}, {beta})"
            )));
        }
        Ok(BetaPosterior { alpha, beta })
    }

    /// Records `edges` present among `pairs` candidate pairs.
    pub fn observe(&mut self, edges: usize, pairs: usize) {
        debug_assert!(edges <= pairs);
        self.alpha += edges as f64;
        self.beta += (pairs - edges) as f64;
    }

    /// Posterior mode `(alpha - 1) / (alpha + beta - 2)`, clamped to `[0, 1]`
    /// when one parameter is below 1 and the mode sits on the boundary.
    pub fn mode(&self) -> Result<f64> {
        let denom = self.alpha + self.beta - 2.0;
        if denom <= 0.0 {
            return Err(Error::UndefinedMode(format!(
                "Beta({}, {}) has no interior mode",
                self.alpha, self.beta
            )));
        }
        Ok(((self.alpha - 1.0) / denom).clamp(0.0, 1.0))
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

/// Gamma posterior (shape, rate) over one node's expected degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPosterior {
    pub alpha: f64,
    pub beta: f64,
}

impl GammaPosterior {
    pub fn prior(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 1.0 && beta > 1.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "Gamma prior needs alpha, beta > 1 (got {alpha}, {beta})"
            )));
        }
        Ok(GammaPosterior { alpha, beta })
    }

    pub fn observe(&mut self, degree: usize) {
        self.alpha += degree as f64;
        self.beta += 1.0;
    }

    /// `(alpha - 1) / beta`.
    pub fn mode(&self) -> f64 {
        (self.alpha - 1.0) / self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Priors {
    /// Beta `(alpha, beta)` for community densities.
    pub density: (f64, f64),
    /// Gamma `(shape, rate)` for expected degrees.
    pub degree: (f64, f64),
}

impl Default for Priors {
    fn default() -> Self {
        Priors {
            density: (1.0, 1.0),
            degree: (2.0, 1.5),
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        BetaPosterior::prior(self.density.0, self.density.1)?;
        GammaPosterior::prior(self.degree.0, self.degree.1)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityFit {
    pub posterior: BetaPosterior,
    pub density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeFit {
    pub posterior: GammaPosterior,
    pub expected_degree: f64,
}

fn pairs(size: usize) -> usize {
    size * size.saturating_sub(1) / 2
}

/// Density estimate for a community without internal pairs: the prior mode
/// when it exists, otherwise the prior mean. It never reaches an edge
/// probability.
fn degenerate_density(prior: BetaPosterior) -> f64 {
    prior.mode().unwrap_or_else(|_| prior.mean())
}

/// Density posterior of a community of `size` nodes from per-graph internal
/// edge counts.
pub fn fit_density_counts(size: usize, internal_edges: &[usize], prior: (f64, f64)) -> Result<DensityFit> {
    if internal_edges.is_empty() {
        return Err(Error::EmptySequence);
    }
    let prior = BetaPosterior::prior(prior.0, prior.1)?;
    let m = pairs(size);
    if let Some(k) = internal_edges.iter().find(|&&k| k > m) {
        return Err(Error::invalid(format!("{k} internal edges exceed {m} pairs")));
    }
    let mut posterior = prior;
    for &k in internal_edges {
        posterior.observe(k, m);
    }
    let density = if m == 0 {
        degenerate_density(prior)
    } else {
        posterior.mode()?
    };
    Ok(DensityFit { posterior, density })
}

/// Edges of `g` inside each community of `partition`.
pub fn internal_edge_counts(g: &LabeledGraph, partition: &Partition) -> Vec<usize> {
    let mut counts = vec![0; partition.len()];
    let assignment = partition.assignment();
    for (i, j) in g.edges() {
        if assignment[i] == assignment[j] {
            counts[assignment[i]] += 1;
        }
    }
    counts
}

pub fn fit_density(seq: &GraphSequence, partition: &Partition, prior: (f64, f64)) -> Result<Vec<DensityFit>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if partition.node_count() != seq.universe().len() {
        return Err(Error::UniverseMismatch);
    }
    let per_graph: Vec<Vec<usize>> = seq
        .snapshots()
        .iter()
        .map(|g| internal_edge_counts(g, partition))
        .collect();
    partition
        .communities()
        .iter()
        .enumerate()
        .map(|(c, members)| {
            let ks: Vec<usize> = per_graph.iter().map(|k| k[c]).collect();
            fit_density_counts(members.len(), &ks, prior)
        })
        .collect()
}

pub fn fit_expected_degree_counts(degrees: &[usize], prior: (f64, f64)) -> Result<DegreeFit> {
    if degrees.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut posterior = GammaPosterior::prior(prior.0, prior.1)?;
    for &d in degrees {
        posterior.observe(d);
    }
    Ok(DegreeFit {
        posterior,
        expected_degree: posterior.mode(),
    })
}

pub fn fit_expected_degree(seq: &GraphSequence, prior: (f64, f64)) -> Result<Vec<DegreeFit>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let degrees: Vec<Vec<usize>> = seq.snapshots().iter().map(LabeledGraph::degrees).collect();
    (0..seq.universe().len())
        .map(|i| {
            let di: Vec<usize> = degrees.iter().map(|d| d[i]).collect();
            fit_expected_degree_counts(&di, prior)
        })
        .collect()
}

/// Conjugate posteriors for every community density and node degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    universe: Arc<Universe>,
    partition: Partition,
    priors: Priors,
    density: Vec<BetaPosterior>,
    degree: Vec<GammaPosterior>,
    observations: usize,
}

impl PosteriorState {
    /// Posteriors equal to the priors, before any observation.
    pub fn from_priors(universe: Arc<Universe>, partition: Partition, priors: Priors) -> Result<Self> {
        priors.validate()?;
        if partition.node_count() != universe.len() {
            return Err(Error::UniverseMismatch);
        }
        let density = vec![BetaPosterior::prior(priors.density.0, priors.density.1)?; partition.len()];
        let degree = vec![GammaPosterior::prior(priors.degree.0, priors.degree.1)?; universe.len()];
        Ok(PosteriorState {
            universe,
            partition,
            priors,
            density,
            degree,
            observations: 0,
        })
    }

    /// Batch fit over a whole sequence.
    pub fn fit(seq: &GraphSequence, partition: Partition, priors: Priors) -> Result<Self> {
        if seq.is_empty() {
            return Err(Error::EmptySequence);
        }
        let densities = fit_density(seq, &partition, priors.density)?;
        let degrees = fit_expected_degree(seq, priors.degree)?;
        Ok(PosteriorState {
            universe: seq.universe().clone(),
            partition,
            priors,
            density: densities.iter().map(|f| f.posterior).collect(),
            degree: degrees.iter().map(|f| f.posterior).collect(),
            observations: seq.len(),
        })
    }

    /// Adds one graph's sufficient statistics.
    pub fn update(&mut self, g: &LabeledGraph) -> Result<()> {
        if !same_universe(&self.universe, g.universe()) {
            return Err(Error::UniverseMismatch);
        }
        for (c, k) in internal_edge_counts(g, &self.partition).into_iter().enumerate() {
            self.density[c].observe(k, pairs(self.partition.communities()[c].len()));
        }
        for (post, d) in self.degree.iter_mut().zip(g.degrees()) {
            post.observe(d);
        }
        self.observations += 1;
        Ok(())
    }

    pub fn updated(&self, g: &LabeledGraph) -> Result<Self> {
        let mut next = self.clone();
        next.update(g)?;
        Ok(next)
    }

    /// Replaces the partition and refits densities from `history`, keeping the
    /// degree posteriors.
    pub fn repartition(&mut self, partition: Partition, history: &GraphSequence) -> Result<()> {
        let densities = fit_density(history, &partition, self.priors.density)?;
        self.density = densities.iter().map(|f| f.posterior).collect();
        self.partition = partition;
        Ok(())
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn priors(&self) -> &Priors {
        &self.priors
    }

    pub fn density_posteriors(&self) -> &[BetaPosterior] {
        &self.density
    }

    pub fn degree_posteriors(&self) -> &[GammaPosterior] {
        &self.degree
    }

    pub fn observations(&self) -> usize {
        self.observations
    }

    /// Posterior-mode model parameters.
    pub fn to_params(&self) -> Result<GbterParams> {
        let prior = BetaPosterior::prior(self.priors.density.0, self.priors.density.1)?;
        let density = self
            .partition
            .communities()
            .iter()
            .zip(&self.density)
            .map(|(members, post)| {
                if pairs(members.len()) == 0 {
                    Ok(degenerate_density(prior))
                } else {
                    post.mode()
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let expected_degree = self.degree.iter().map(GammaPosterior::mode).collect();
        GbterParams::new(self.universe.clone(), self.partition.clone(), density, expected_degree)
    }

    pub fn to_document(&self) -> PosteriorDocument {
        let labels = self.universe.labels();
        PosteriorDocument {
            universe: labels.to_vec(),
            communities: self
                .partition
                .communities()
                .iter()
                .map(|c| c.iter().map(|&i| labels[i].clone()).collect())
                .collect(),
            priors: self.priors,
            density_posteriors: self.density.clone(),
            degree_posteriors: labels.iter().cloned().zip(self.degree.iter().copied()).collect(),
            observations: self.observations,
        }
    }

    pub fn from_document(doc: PosteriorDocument) -> Result<Self> {
        let universe = Arc::new(Universe::new(doc.universe)?);
        let blocks = doc
            .communities
            .iter()
            .map(|c| c.iter().map(|l| universe.index_of(l)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut order: Vec<(usize, usize)> = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| (b.iter().copied().min().unwrap_or(usize::MAX), k))
            .collect();
        order.sort_unstable();
        let partition = Partition::new(universe.len(), blocks)?;
        if doc.density_posteriors.len() != partition.len() {
            return Err(Error::invalid("one density posterior per community is required"));
        }
        let density = order.iter().map(|&(_, k)| doc.density_posteriors[k]).collect();
        let degree = universe
            .labels()
            .iter()
            .map(|l| {
                doc.degree_posteriors
                    .get(l)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("no degree posterior for `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        doc.priors.validate()?;
        Ok(PosteriorState {
            universe,
            partition,
            priors: doc.priors,
            density,
            degree,
            observations: doc.observations,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDocument {
    pub universe: Vec<String>,
    pub communities: Vec<Vec<String>>,
    pub priors: Priors,
    pub density_posteriors: Vec<BetaPosterior>,
    pub degree_posteriors: BTreeMap<String, GammaPosterior>,
    pub observations: usize,
}
