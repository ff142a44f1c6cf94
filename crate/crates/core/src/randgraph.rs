//! Seeded random graph models.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::scalar::Scalar;

/// Default number of attempts in [`generate_connected`].
pub const DEFAULT_CONNECT_TRIES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// Points at uniform angles on the unit circle, joined with probability
    /// `min(1, scale · exp(−bandwidth ‖x_i − x_j‖²))`.
    LatentCircle { scale: f64, bandwidth: f64 },
    /// Two equal communities (first half, second half).
    Sbm2 { p_in: f64, p_out: f64 },
    /// Ring lattice of even degree `k` with each edge rewired with probability `beta`.
    WattsStrogatz { k: usize, beta: f64 },
    ErdosRenyi { p: f64 },
    /// Preferential attachment with `m` edges per new vertex, grown from a
    /// clique on `m + 1` vertices.
    BarabasiAlbert { m: usize },
    /// Vertices on a line joined with probability `min(1, scale / |i − j|)`.
    LatentPath { scale: f64 },
}

impl Model {
    /// Kernel used for the dynamic-network experiments.
    pub fn latent_circle_dynamic() -> Self {
        Model::LatentCircle {
            scale: 20.0 / PI.sqrt(),
            bandwidth: 400.0,
        }
    }

    /// Kernel used for the edge-addition validation experiments.
    pub fn latent_circle_validation() -> Self {
        Model::LatentCircle {
            scale: 10.0 / PI.sqrt(),
            bandwidth: 100.0,
        }
    }

    pub fn latent_path_default() -> Self {
        Model::LatentPath { scale: 100.0 }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        match *self {
            Model::LatentCircle { scale, bandwidth } => {
                if !(scale >= 0.0 && bandwidth >= 0.0) {
                    return Err(Error::param("latent circle scale and bandwidth must be nonnegative"));
                }
            }
            Model::Sbm2 { p_in, p_out } => {
                prob("p_in", p_in)?;
                prob("p_out", p_out)?;
            }
            Model::WattsStrogatz { k, beta } => {
                prob("beta", beta)?;
                if k % 2 != 0 || k == 0 || k >= n {
                    return Err(Error::param(format!("ring degree k must be even and in [2, n), got {k}")));
                }
            }
            Model::ErdosRenyi { p } => prob("p", p)?,
            Model::BarabasiAlbert { m } => {
                if m == 0 || n < m + 1 {
                    return Err(Error::param(format!("attachment count m = {m} needs 1 <= m < n")));
                }
            }
            Model::LatentPath { scale } => {
                if !(scale >= 0.0) {
                    return Err(Error::param("latent path scale must be nonnegative"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub model: Model,
    pub n: usize,
    pub seed: u64,
}

/// A sampled graph and any latent state needed to resample from it.
#[derive(Debug, Clone)]
pub struct Generated<T> {
    pub graph: GraphSnapshot<T>,
    pub angles: Option<Vec<f64>>,
    pub blocks: Option<Vec<usize>>,
}

/// JSON-friendly record of how a graph was sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentState {
    pub spec: GeneratorSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub angles: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub blocks: Option<Vec<usize>>,
}

impl<T: Scalar> Generated<T> {
    pub fn latent_state(&self, spec: GeneratorSpec) -> LatentState {
        LatentState {
            spec,
            angles: self.angles.clone(),
            blocks: self.blocks.clone(),
        }
    }
}

fn bernoulli_pairs<T: Scalar>(n: usize, rng: &mut ChaCha8Rng, mut prob: impl FnMut(usize, usize) -> f64) -> Result<GraphSnapshot<T>> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = prob(i, j).min(1.0);
            if p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p) {
                edges.push((i, j, T::one()));
            }
        }
    }
    GraphSnapshot::new(n, edges)
}

fn circle_edges<T: Scalar>(angles: &[f64], scale: f64, bandwidth: f64, rng: &mut ChaCha8Rng) -> Result<GraphSnapshot<T>> {
    bernoulli_pairs(angles.len(), rng, |i, j| {
        // Squared chord length between the two points on the unit circle.
        let d2 = 2.0 - 2.0 * (angles[i] - angles[j]).cos();
        scale * (-bandwidth * d2).exp()
    })
}

fn watts_strogatz<T: Scalar>(n: usize, k: usize, beta: f64, rng: &mut ChaCha8Rng) -> Result<GraphSnapshot<T>> {
    let mut adj: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let v = (i + j) % n;
            adj[i].insert(v);
            adj[v].insert(i);
        }
    }
    for j in 1..=k / 2 {
        for i in 0..n {
            let v = (i + j) % n;
            if !adj[i].contains(&v) || rng.random::<f64>() >= beta {
                continue;
            }
            if adj[i].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != i && !adj[i].contains(&w) {
                    break w;
                }
            };
            adj[i].remove(&v);
            adj[v].remove(&i);
            adj[i].insert(w);
            adj[w].insert(i);
        }
    }
    let mut edges = Vec::new();
    for (i, set) in adj.iter().enumerate() {
        for &j in set {
            if i < j {
                edges.push((i, j, T::one()));
            }
        }
    }
    GraphSnapshot::new(n, edges)
}

fn barabasi_albert<T: Scalar>(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<GraphSnapshot<T>> {
    let mut edges = Vec::new();
    // Each vertex appears once per incident edge end.
    let mut ends: Vec<usize> = Vec::new();
    for i in 0..=m {
        for j in (i + 1)..=m {
            edges.push((i, j, T::one()));
            ends.push(i);
            ends.push(j);
        }
    }
    for v in (m + 1)..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let t = ends[rng.random_range(0..ends.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, v, T::one()));
            ends.push(t);
            ends.push(v);
        }
    }
    GraphSnapshot::new(n, edges)
}

/// Samples one graph. Deterministic in `spec`.
pub fn generate<T: Scalar>(spec: &GeneratorSpec) -> Result<Generated<T>> {
    let n = spec.n;
    spec.model.validate(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Generated {
        graph: GraphSnapshot::empty(n),
        angles: None,
        blocks: None,
    };
    out.graph = match spec.model {
        Model::LatentCircle { scale, bandwidth } => {
            let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            let g = circle_edges(&angles, scale, bandwidth, &mut rng)?;
            out.angles = Some(angles);
            g
        }
        Model::Sbm2 { p_in, p_out } => {
            let blocks: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
            let g = bernoulli_pairs(n, &mut rng, |i, j| if blocks[i] == blocks[j] { p_in } else { p_out })?;
            out.blocks = Some(blocks);
            g
        }
        Model::WattsStrogatz { k, beta } => watts_strogatz(n, k, beta, &mut rng)?,
        Model::ErdosRenyi { p } => bernoulli_pairs(n, &mut rng, |_, _| p)?,
        Model::BarabasiAlbert { m } => barabasi_albert(n, m, &mut rng)?,
        Model::LatentPath { scale } => bernoulli_pairs(n, &mut rng, |i, j| scale / (j - i) as f64)?,
    };
    Ok(out)
}

fn retry_seed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Samples until the graph is connected, trying seeds derived from
/// `spec.seed` (the first attempt uses `spec.seed` itself).
pub fn generate_connected<T: Scalar>(spec: &GeneratorSpec, tries: usize) -> Result<Generated<T>> {
    for attempt in 0..tries.max(1) {
        let s = GeneratorSpec {
            seed: retry_seed(spec.seed, attempt),
            ..*spec
        };
        let g = generate(&s)?;
        if g.graph.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed { tries: tries.max(1) })
}

/// Jitters the angles by `N(0, σ²)` and resamples edges with the same kernel.
pub fn perturb_latent_circle<T: Scalar>(
    angles: &[f64],
    sigma: f64,
    seed: u64,
    model: Model,
) -> Result<Generated<T>> {
    if !(sigma >= 0.0) {
        return Err(Error::param(format!("sigma must be nonnegative, got {sigma}")));
    }
    let Model::LatentCircle { scale, bandwidth } = model else {
        return Err(Error::param("perturb_latent_circle needs a latent circle model"));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
    let moved: Vec<f64> = angles.iter().map(|&t| t + jitter.sample(&mut rng)).collect();
    let graph = circle_edges(&moved, scale, bandwidth, &mut rng)?;
    Ok(Generated {
        graph,
        angles: Some(moved),
        blocks: None,
    })
}

/// Expected edge count of the latent path model: `Σ_d (n − d) min(1, scale/d)`.
pub fn latent_path_expected_edges(n: usize, scale: f64) -> f64 {
    (1..n).map(|d| (n - d) as f64 * (scale / d as f64).min(1.0)).sum()
}

/// Smallest `n` whose expected latent-path edge count reaches `m`.
pub fn latent_path_size_for_edges(m: f64, scale: f64) -> usize {
    let (mut lo, mut hi) = (2usize, 4usize);
    while latent_path_expected_edges(hi, scale) < m {
        hi *= 2;
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if latent_path_expected_edges(mid, scale) < m {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(model: Model, n: usize, seed: u64) -> GeneratorSpec {
        GeneratorSpec { model, n, seed }
    }

    #[test]
    fn er_with_p_one_is_complete() {
        let g: Generated<f64> = generate(&spec(Model::ErdosRenyi { p: 1.0 }, 100, 3)).unwrap();
        assert_eq!(g.graph.m(), 100 * 99 / 2);
    }

    #[test]
    fn ws_without_rewiring_is_a_ring_lattice() {
        let g: Generated<f64> = generate(&spec(Model::WattsStrogatz { k: 4, beta: 0.0 }, 50, 1)).unwrap();
        assert!((0..50).all(|i| g.graph.neighbors(i).len() == 4));
        assert!(g.graph.has_edge(0, 49) && g.graph.has_edge(0, 48) && !g.graph.has_edge(0, 47));
    }

    #[test]
    fn ws_rewiring_preserves_edge_count() {
        let g: Generated<f64> = generate(&spec(Model::WattsStrogatz { k: 6, beta: 0.3 }, 80, 9)).unwrap();
        assert_eq!(g.graph.m(), 80 * 3);
    }

    #[test]
    fn ba_edge_count_and_hubs() {
        let g: Generated<f64> = generate(&spec(Model::BarabasiAlbert { m: 2 }, 500, 5)).unwrap();
        assert_eq!(g.graph.m(), 3 + 2 * 497);
        let max_deg = (0..500).map(|i| g.graph.neighbors(i).len()).max().unwrap();
        assert!(max_deg > 20, "{max_deg}");
    }

    #[test]
    fn deterministic_given_seed() {
        let s = spec(Model::latent_circle_dynamic(), 120, 77);
        let a: Generated<f64> = generate(&s).unwrap();
        let b: Generated<f64> = generate(&s).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.angles, b.angles);
    }

    #[test]
    fn invalid_parameters() {
        assert!(generate::<f64>(&spec(Model::ErdosRenyi { p: 1.5 }, 10, 0)).is_err());
        assert!(generate::<f64>(&spec(Model::WattsStrogatz { k: 3, beta: 0.1 }, 10, 0)).is_err());
        assert!(perturb_latent_circle::<f64>(&[0.0, 1.0], -0.1, 0, Model::latent_circle_dynamic()).is_err());
    }

    #[test]
    fn connected_retry_reports_failure() {
        let s = spec(Model::ErdosRenyi { p: 0.0 }, 5, 0);
        assert!(matches!(generate_connected::<f64>(&s, 3), Err(Error::GenerationFailed { tries: 3 })));
        let s = spec(Model::ErdosRenyi { p: 0.1 }, 60, 0);
        assert!(generate_connected::<f64>(&s, DEFAULT_CONNECT_TRIES).unwrap().graph.is_connected());
    }

    #[test]
    fn zero_jitter_keeps_angles() {
        let s = spec(Model::latent_circle_dynamic(), 60, 1);
        let g: Generated<f64> = generate(&s).unwrap();
        let angles = g.angles.unwrap();
        let p: Generated<f64> = perturb_latent_circle(&angles, 0.0, 4, s.model).unwrap();
        assert_eq!(p.angles.unwrap(), angles);
    }

    #[test]
    fn latent_path_sizes() {
        assert_eq!(latent_path_expected_edges(50, 100.0), (50 * 49 / 2) as f64);
        let n = latent_path_size_for_edges(1e5, 100.0);
        assert!(latent_path_expected_edges(n, 100.0) >= 1e5);
        assert!(latent_path_expected_edges(n - 1, 100.0) < 1e5);
    }
}
