//! Single-edge perturbations: exact RP-1 change, pairwise resistance change,
//! low-rank spectral bounds, and edge-addition search.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::resistance::{pseudo_inverse, resistance_matrix, ResistanceMatrix};
use crate::scalar::Scalar;
use crate::spectral::SpectralDecomposition;

/// Default size limit for [`exhaustive_best_edge`].
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 500;

/// Change `dw` to the weight of pair `(i0, j0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePerturbation<T> {
    pub i0: usize,
    pub j0: usize,
    pub dw: T,
}

impl<T: Scalar> EdgePerturbation<T> {
    pub fn new(i0: usize, j0: usize, dw: T) -> Result<Self> {
        if i0 == j0 {
            return Err(Error::param(format!("perturbation endpoints coincide at {i0}")));
        }
        Ok(EdgePerturbation { i0, j0, dw })
    }

    pub fn apply(&self, g: &GraphSnapshot<T>) -> Result<GraphSnapshot<T>> {
        g.with_weight_delta(self.i0, self.j0, self.dw)
    }

    fn validate(&self, g: &GraphSnapshot<T>) -> Result<()> {
        g.check_vertex(self.i0)?;
        g.check_vertex(self.j0)?;
        if self.i0 == self.j0 {
            return Err(Error::param(format!("perturbation endpoints coincide at {}", self.i0)));
        }
        let w = g.weight(self.i0, self.j0).unwrap_or_else(T::zero);
        let tol = T::tol(1e-12) * w.abs().max(T::one());
        if w + self.dw < -tol {
            return Err(Error::param(format!(
                "weight {w} plus {} on ({}, {}) is negative",
                self.dw, self.i0, self.j0
            )));
        }
        Ok(())
    }

    /// True when the perturbation deletes a bridge.
    pub fn disconnects(&self, g: &GraphSnapshot<T>) -> bool {
        let Some(w) = g.weight(self.i0, self.j0) else {
            return false;
        };
        if w + self.dw > T::tol(1e-12) * w.abs().max(T::one()) {
            return false;
        }
        let n = g.n();
        let mut seen = vec![false; n];
        seen[self.i0] = true;
        let mut queue = VecDeque::from([self.i0]);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in g.neighbors(x) {
                let skipped = (x == self.i0 && y == self.j0) || (x == self.j0 && y == self.i0);
                if !skipped && !seen[y] {
                    if y == self.j0 {
                        return false;
                    }
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        true
    }
}

fn check_spectrum<T: Scalar>(g: &GraphSnapshot<T>, spec: &SpectralDecomposition<T>) -> Result<()> {
    if spec.n() != g.n() {
        return Err(Error::SizeMismatch {
            left: spec.n(),
            right: g.n(),
        });
    }
    if spec.p() < 2 {
        return Err(Error::param(format!("need at least 2 eigenpairs, got {}", spec.p())));
    }
    if !(spec.lambdas[1] > T::zero()) {
        return Err(Error::Disconnected { components: 0 });
    }
    Ok(())
}

/// Exact RP-1 distance between `g` and `g ⊕ pert` from the full spectrum:
/// `2n|Δw| Σ_k Δφ_k²/λ_k² / (1 + Δw R_{i0j0})`. A bridge removal gives `+∞`.
pub fn rp1_edge_perturbation<T: Scalar>(
    g: &GraphSnapshot<T>,
    spec: &SpectralDecomposition<T>,
    pert: &EdgePerturbation<T>,
) -> Result<T> {
    check_spectrum(g, spec)?;
    if !spec.is_full() {
        return Err(Error::param(format!(
            "exact edge perturbation needs the full spectrum, got {} of {} pairs",
            spec.p(),
            spec.n()
        )));
    }
    pert.validate(g)?;
    if pert.dw == T::zero() {
        return Ok(T::zero());
    }
    if pert.disconnects(g) {
        return Ok(T::infinity());
    }
    let (mut s1, mut s2) = (T::zero(), T::zero());
    for k in 1..spec.p() {
        let d = spec.phis[(pert.i0, k)] - spec.phis[(pert.j0, k)];
        let inv = T::one() / spec.lambdas[k];
        s1 += d * d * inv;
        s2 += d * d * inv * inv;
    }
    let den = T::one() + pert.dw * s1;
    if !(den > T::zero()) {
        return Ok(T::infinity());
    }
    Ok(T::of(2.0) * T::of_usize(g.n()) * pert.dw.abs() * s2 / den)
}

/// `ΔR_ij` for every pair, from the unperturbed resistance matrix.
pub fn delta_r_matrix<T: Scalar>(r: &ResistanceMatrix<T>, pert: &EdgePerturbation<T>) -> nalgebra::DMatrix<T> {
    let (a, b) = (pert.i0, pert.j0);
    let den = T::of(4.0) * (T::one() + pert.dw * r.get(a, b));
    let tiny = T::tol(1e-12);
    nalgebra::DMatrix::from_fn(r.n(), r.n(), |i, j| {
        let c = r.get(i, a) + r.get(j, b) - r.get(i, b) - r.get(j, a);
        let num = pert.dw * c * c;
        if den > tiny {
            -num / den
        } else if num.abs() <= tiny * r.get(a, b).max(T::one()) {
            T::zero()
        } else {
            T::infinity()
        }
    })
}

/// `R_ij(g ⊕ pert) − R_ij(g)`.
pub fn delta_r_pair<T: Scalar>(g: &GraphSnapshot<T>, pert: &EdgePerturbation<T>, i: usize, j: usize) -> Result<T> {
    pert.validate(g)?;
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    if pert.dw == T::zero() {
        return Ok(T::zero());
    }
    let r = resistance_matrix(g)?;
    Ok(delta_r_matrix(&r, pert)[(i, j)])
}

/// `lower ≤ exact ≤ upper` with `mid = (lower + upper) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsPair<T> {
    pub lower: T,
    pub upper: T,
    pub mid: T,
}

impl<T: Scalar> BoundsPair<T> {
    pub fn new(lower: T, upper: T) -> Self {
        BoundsPair {
            lower,
            upper,
            mid: (lower + upper) * T::of(0.5),
        }
    }

    pub fn width(&self) -> T {
        self.upper - self.lower
    }

    pub fn contains(&self, x: T, slack: T) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }
}

/// Precomputed `1/λ_k` for fast repeated bound evaluation.
struct LowRank<'s, T: Scalar> {
    spec: &'s SpectralDecomposition<T>,
    inv: Vec<T>,
    inv_top: T,
    inv_p: T,
}

impl<'s, T: Scalar> LowRank<'s, T> {
    fn new(spec: &'s SpectralDecomposition<T>) -> Self {
        let p = spec.p();
        let inv = (0..p)
            .map(|k| if k == 0 { T::zero() } else { T::one() / spec.lambdas[k] })
            .collect();
        LowRank {
            spec,
            inv,
            inv_top: T::one() / spec.lambda_max,
            inv_p: T::one() / spec.lambdas[p - 1],
        }
    }

    /// Bounds on `Σ_k Δφ_k²/λ_k` and `Σ_k Δφ_k²/λ_k²`.
    fn sums(&self, i: usize, j: usize) -> (BoundsPair<T>, BoundsPair<T>) {
        if i == j {
            let z = BoundsPair::new(T::zero(), T::zero());
            return (z, z);
        }
        let two = T::of(2.0);
        let (top, pp) = (self.inv_top, self.inv_p);
        let (mut lo1, mut hi1, mut lo2, mut hi2) = (two * top, two * pp, two * top * top, two * pp * pp);
        for k in 1..self.spec.p() {
            let d = self.spec.phis[(i, k)] - self.spec.phis[(j, k)];
            let d2 = d * d;
            let a = self.inv[k];
            lo1 += (a - top) * d2;
            hi1 += (a - pp) * d2;
            lo2 += (a * a - top * top) * d2;
            hi2 += (a * a - pp * pp) * d2;
        }
        (BoundsPair::new(lo1, hi1), BoundsPair::new(lo2, hi2))
    }

    fn edge_bounds(&self, n: usize, i: usize, j: usize, dw: T) -> PerturbationBounds<T> {
        if dw == T::zero() {
            let z = BoundsPair::new(T::zero(), T::zero());
            return PerturbationBounds { bounds: z, estimate: T::zero() };
        }
        let (den, num) = self.sums(i, j);
        let one = T::one();
        let ratio = |nu: T, de: T| {
            let d = one + dw * de;
            if d > T::zero() {
                nu / d
            } else {
                T::infinity()
            }
        };
        let (lower, upper) = if dw > T::zero() {
            (ratio(num.lower, den.upper), ratio(num.upper, den.lower))
        } else {
            (ratio(num.lower, den.lower), ratio(num.upper, den.upper))
        };
        let scale = T::of(2.0) * T::of_usize(n) * dw.abs();
        PerturbationBounds {
            bounds: BoundsPair::new(scale * lower, scale * upper),
            estimate: scale * ratio(num.mid, den.mid),
        }
    }
}

/// Bounds on `Σ_{k≥2} Δφ_k²/λ_k` (this is `R_ij`) and on `Σ_{k≥2} Δφ_k²/λ_k²`
/// from the first `p` eigenpairs. Collapse to the exact sums when `p = n`.
pub fn low_rank_sums<T: Scalar>(
    spec: &SpectralDecomposition<T>,
    i: usize,
    j: usize,
) -> Result<(BoundsPair<T>, BoundsPair<T>)> {
    if spec.p() < 2 {
        return Err(Error::param(format!("need at least 2 eigenpairs, got {}", spec.p())));
    }
    for v in [i, j] {
        if v >= spec.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: spec.n() });
        }
    }
    if !(spec.lambdas[1] > T::zero()) {
        return Err(Error::Disconnected { components: 0 });
    }
    Ok(LowRank::new(spec).sums(i, j))
}

/// Bracket on the RP-1 change plus the ratio-of-midpoints estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationBounds<T> {
    pub bounds: BoundsPair<T>,
    pub estimate: T,
}

pub fn rp1_edge_perturbation_bounds<T: Scalar>(
    g: &GraphSnapshot<T>,
    spec: &SpectralDecomposition<T>,
    pert: &EdgePerturbation<T>,
) -> Result<PerturbationBounds<T>> {
    check_spectrum(g, spec)?;
    pert.validate(g)?;
    if pert.disconnects(g) {
        let inf = T::infinity();
        return Ok(PerturbationBounds {
            bounds: BoundsPair::new(inf, inf),
            estimate: inf,
        });
    }
    Ok(LowRank::new(spec).edge_bounds(g.n(), pert.i0, pert.j0, pert.dw))
}

/// `Kf(g) − Kf(g ⊕ pert)` by full recomputation.
pub fn exact_kirchhoff_drop<T: Scalar>(g: &GraphSnapshot<T>, pert: &EdgePerturbation<T>) -> Result<T> {
    let before = resistance_matrix(g)?.kirchhoff;
    let after = resistance_matrix(&pert.apply(g)?)?.kirchhoff;
    Ok(before - after)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidatePolicy {
    /// Only pairs not already joined by an edge.
    NonNeighbors,
    /// Every pair; existing edges get their weight increased.
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreedyOptions {
    pub seed: u64,
    pub restarts: usize,
    pub dw: f64,
    pub policy: CandidatePolicy,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            seed: 42,
            restarts: 1,
            dw: 1.0,
            policy: CandidatePolicy::NonNeighbors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult<T> {
    pub edge: EdgePerturbation<T>,
    /// Estimated Kirchhoff-index drop of the chosen edge.
    pub predicted: T,
    /// Scores of successively accepted pairs in the winning run.
    pub trajectory: Vec<T>,
    pub sweeps: usize,
}

fn canonical(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

/// `a` beats `b` if it is larger beyond round-off, or tied and lexicographically smaller.
fn better<T: Scalar>(a: (T, (usize, usize)), b: (T, (usize, usize))) -> bool {
    let tol = T::tol(1e-10) * a.0.abs().max(b.0.abs()).max(T::tol(1e-300));
    if a.0 > b.0 + tol {
        true
    } else if a.0 + tol < b.0 {
        false
    } else {
        a.1 < b.1
    }
}

/// Alternating coordinate search for the pair whose addition most reduces
/// the Kirchhoff index. Each step fixes one endpoint and moves the other to
/// its best candidate; the search stops when neither move strictly improves.
pub fn greedy_best_edge<T: Scalar>(
    g: &GraphSnapshot<T>,
    spec: &SpectralDecomposition<T>,
    opts: &GreedyOptions,
) -> Result<GreedyResult<T>> {
    check_spectrum(g, spec)?;
    g.require_connected()?;
    if !(opts.dw > 0.0) {
        return Err(Error::param(format!("greedy search adds weight; dw must be positive, got {}", opts.dw)));
    }
    let n = g.n();
    let dw = T::of(opts.dw);
    let allowed = |i: usize, j: usize| i != j && (opts.policy == CandidatePolicy::AllPairs || !g.has_edge(i, j));
    let pivots: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| allowed(i, j))).collect();
    if pivots.is_empty() {
        return Err(Error::NoCandidates);
    }
    let lr = LowRank::new(spec);
    let score = |i: usize, j: usize| lr.edge_bounds(n, i, j, dw).estimate;
    let best_partner = |fixed: usize| -> Option<(T, (usize, usize))> {
        let mut best: Option<(T, (usize, usize))> = None;
        for other in 0..n {
            if !allowed(fixed, other) {
                continue;
            }
            let cand = (score(fixed, other), canonical(fixed, other));
            if best.is_none_or(|b| better(cand, b)) {
                best = Some(cand);
            }
        }
        best
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut winner: Option<GreedyResult<T>> = None;
    for _ in 0..opts.restarts.max(1) {
        let start = pivots[rng.random_range(0..pivots.len())];
        let mut current = best_partner(start).expect("pivot has a candidate");
        let mut trajectory = vec![current.0];
        // The endpoint that just moved; the next step fixes it and moves the other.
        let mut fixed = if current.1 .0 == start { current.1 .1 } else { current.1 .0 };
        let mut sweeps = 0;
        while sweeps < n {
            sweeps += 1;
            let Some(cand) = best_partner(fixed) else { break };
            if cand.1 != current.1 && better(cand, current) && cand.0 > current.0 {
                let moved = if cand.1 .0 == fixed { cand.1 .1 } else { cand.1 .0 };
                current = cand;
                trajectory.push(current.0);
                fixed = moved;
            } else {
                break;
            }
        }
        let (i0, j0) = current.1;
        let result = GreedyResult {
            edge: EdgePerturbation { i0, j0, dw },
            predicted: current.0,
            trajectory,
            sweeps,
        };
        let replace = match &winner {
            None => true,
            Some(w) => better((result.predicted, current.1), (w.predicted, (w.edge.i0, w.edge.j0))),
        };
        if replace {
            winner = Some(result);
        }
    }
    Ok(winner.expect("at least one restart"))
}

/// Exact best pair to add (weight `dw`) over all non-edges, in `O(n³)`.
/// Returns the pair and its exact Kirchhoff-index drop.
pub fn exhaustive_best_edge<T: Scalar>(g: &GraphSnapshot<T>, dw: T, cap: usize) -> Result<(EdgePerturbation<T>, T)> {
    let n = g.n();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if !(dw > T::zero()) {
        return Err(Error::param(format!("dw must be positive, got {dw}")));
    }
    g.require_connected()?;
    let ldag = pseudo_inverse(&g.laplacian())?.ldag;
    let sq = &ldag * &ldag;
    let two = T::of(2.0);
    let scale = two * T::of_usize(n) * dw;
    let mut best: Option<(T, (usize, usize))> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            if g.has_edge(i, j) {
                continue;
            }
            let r = ldag[(i, i)] + ldag[(j, j)] - two * ldag[(i, j)];
            let s2 = sq[(i, i)] + sq[(j, j)] - two * sq[(i, j)];
            let cand = (scale * s2 / (T::one() + dw * r), (i, j));
            if best.is_none_or(|b| better(cand, b)) {
                best = Some(cand);
            }
        }
    }
    let (value, (i0, j0)) = best.ok_or(Error::NoCandidates)?;
    Ok((EdgePerturbation { i0, j0, dw }, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rp::{rp_distance, RpOrder};
    use crate::spectral::{full_spectrum, partial_spectrum};

    fn complete(n: usize) -> GraphSnapshot<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                t.push((i, j, 1.0));
            }
        }
        GraphSnapshot::new(n, t).unwrap()
    }

    fn path(n: usize) -> GraphSnapshot<f64> {
        GraphSnapshot::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn star(n: usize) -> GraphSnapshot<f64> {
        GraphSnapshot::new(n, (1..n).map(|i| (0, i, 1.0))).unwrap()
    }

    fn cycle(n: usize) -> GraphSnapshot<f64> {
        GraphSnapshot::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).unwrap()
    }

    #[test]
    fn complete_graph_value() {
        let g = complete(4);
        let s = full_spectrum(&g).unwrap();
        let p = EdgePerturbation::new(1, 3, 1.0).unwrap();
        let v = rp1_edge_perturbation(&g, &s, &p).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bridge_removal_is_infinite() {
        let g = path(2);
        let s = full_spectrum(&g).unwrap();
        let p = EdgePerturbation::new(0, 1, -1.0).unwrap();
        assert_eq!(rp1_edge_perturbation(&g, &s, &p).unwrap(), f64::INFINITY);
        let b = rp1_edge_perturbation_bounds(&g, &s, &p).unwrap();
        assert_eq!(b.estimate, f64::INFINITY);
        let c = cycle(5);
        let cut = EdgePerturbation::new(0, 1, -1.0).unwrap();
        assert!(!cut.disconnects(&c));
        assert!(rp1_edge_perturbation(&c, &full_spectrum(&c).unwrap(), &cut).unwrap().is_finite());
    }

    #[test]
    fn partial_spectrum_rejected_for_exact_value() {
        let g = cycle(8);
        let s = partial_spectrum(&g, 3, 0).unwrap();
        let p = EdgePerturbation::new(0, 4, 1.0).unwrap();
        assert!(rp1_edge_perturbation(&g, &s, &p).is_err());
    }

    #[test]
    fn delta_r_examples() {
        let k3 = complete(3);
        let p = EdgePerturbation::new(0, 1, 1.0).unwrap();
        // R_01 drops from 2/3 to 2/5.
        assert!((delta_r_pair(&k3, &p, 0, 1).unwrap() + 4.0 / 15.0).abs() < 1e-12);
        let zero = EdgePerturbation::new(0, 1, 0.0).unwrap();
        assert_eq!(delta_r_pair(&k3, &zero, 0, 2).unwrap(), 0.0);

        // Tree: vertices 2 and 3 sit on the same side of edge (0, 1).
        let tree: GraphSnapshot<f64> = GraphSnapshot::new(5, [(0, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0), (0, 4, 1.0)]).unwrap();
        let bump = EdgePerturbation::new(0, 1, 2.0).unwrap();
        assert!(delta_r_pair(&tree, &bump, 2, 3).unwrap().abs() < 1e-12);
        assert!(delta_r_pair(&tree, &bump, 2, 4).unwrap() < 0.0);
    }

    #[test]
    fn bounds_collapse_at_full_rank() {
        let g = complete(5);
        let s = full_spectrum(&g).unwrap();
        let (r, _) = low_rank_sums(&s, 0, 3).unwrap();
        assert!((r.lower - 0.4).abs() < 1e-12 && (r.upper - 0.4).abs() < 1e-12);

        let c = cycle(9);
        let s = full_spectrum(&c).unwrap();
        let p = EdgePerturbation::new(0, 4, 1.0).unwrap();
        let exact = rp1_edge_perturbation(&c, &s, &p).unwrap();
        let b = rp1_edge_perturbation_bounds(&c, &s, &p).unwrap();
        assert!((b.bounds.lower - exact).abs() < 1e-10 * exact);
        assert!((b.bounds.upper - exact).abs() < 1e-10 * exact);
        assert!((b.estimate - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn bounds_bracket_both_signs() {
        let g: GraphSnapshot<f64> = GraphSnapshot::new(
            8,
            [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 1.0), (3, 4, 1.5), (4, 5, 1.0), (5, 6, 1.0), (6, 7, 1.0), (7, 4, 0.5), (2, 6, 1.0)],
        )
        .unwrap();
        let full = full_spectrum(&g).unwrap();
        for (i, j, dw) in [(0, 5, 0.7), (1, 2, -1.5), (4, 7, -0.25), (0, 1, 3.0)] {
            let p = EdgePerturbation::new(i, j, dw).unwrap();
            let exact = rp1_edge_perturbation(&g, &full, &p).unwrap();
            let direct = rp_distance(&g, &p.apply(&g).unwrap(), RpOrder::ONE).unwrap();
            assert!((exact - direct).abs() < 1e-9 * (1.0 + direct));
            for rank in 2..8 {
                let b = rp1_edge_perturbation_bounds(&g, &partial_spectrum(&g, rank, 0).unwrap(), &p).unwrap();
                assert!(b.bounds.contains(exact, 1e-9 * exact), "({i},{j},{dw}) p={rank}: {b:?} vs {exact}");
            }
        }
    }

    #[test]
    fn greedy_on_star_picks_leaf_pair() {
        let g = star(20);
        let s = full_spectrum(&g).unwrap();
        let r = greedy_best_edge(&g, &s, &GreedyOptions::default()).unwrap();
        assert!(r.edge.i0 != 0 && r.edge.j0 != 0);
        assert!(r.trajectory.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn greedy_on_path_near_optimal() {
        let g = path(10);
        let s = full_spectrum(&g).unwrap();
        let (best, opt) = exhaustive_best_edge(&g, 1.0, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        let direct = exact_kirchhoff_drop(&g, &best).unwrap();
        assert!((opt - direct).abs() < 1e-9 * direct);
        for seed in 0..10 {
            let opts = GreedyOptions { seed, ..GreedyOptions::default() };
            let r = greedy_best_edge(&g, &s, &opts).unwrap();
            let got = exact_kirchhoff_drop(&g, &r.edge).unwrap();
            assert!(got >= 0.8 * opt, "seed {seed}: {got} vs {opt}");
        }
    }

    #[test]
    fn complete_graph_has_no_candidates() {
        let g = complete(5);
        let s = full_spectrum(&g).unwrap();
        assert!(matches!(greedy_best_edge(&g, &s, &GreedyOptions::default()), Err(Error::NoCandidates)));
        assert!(matches!(exhaustive_best_edge(&g, 1.0, 500), Err(Error::NoCandidates)));
    }

    #[test]
    fn exhaustive_cycle_picks_diameter() {
        let g = cycle(8);
        let (e, _) = exhaustive_best_edge(&g, 1.0, 500).unwrap();
        assert_eq!((e.i0, e.j0), (0, 4));
        assert!(matches!(exhaustive_best_edge(&g, 1.0, 7), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn exhaustive_path4_matches_brute_force() {
        let g = path(4);
        let (e, v) = exhaustive_best_edge(&g, 1.0, 500).unwrap();
        let mut best = (0.0, (0, 0));
        for i in 0..4 {
            for j in (i + 1)..4 {
                if g.has_edge(i, j) {
                    continue;
                }
                let d = exact_kirchhoff_drop(&g, &EdgePerturbation::new(i, j, 1.0).unwrap()).unwrap();
                if d > best.0 + 1e-12 {
                    best = (d, (i, j));
                }
            }
        }
        assert_eq!((e.i0, e.j0), best.1);
        assert_eq!((e.i0, e.j0), (0, 3));
        assert!((v - best.0).abs() < 1e-10);
    }
}
