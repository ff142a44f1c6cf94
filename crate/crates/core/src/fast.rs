//! Sketched effective resistances and the fast RP-2 distance.
//!
//! A random `s × m` sign matrix `Q` projects `dA^{1/2} B`; solving against
//! `L` row by row gives `Z` with `‖Z(e_i − e_j)‖² ≈ R_ij`. The Frobenius
//! distance between two sketched resistance matrices is then evaluated in
//! `O(n s²)` without forming any `n × n` matrix.

use std::time::{Duration, Instant};

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::rp::{rp_distance, RpOrder};
use crate::scalar::Scalar;
use crate::solver::{LaplacianSolver, SolverSpec};

/// `⌈24 ln n / ε²⌉`, at least one row.
pub fn sketch_rows(n: usize, epsilon: f64) -> usize {
    let s = (24.0 * (n.max(1) as f64).ln() / (epsilon * epsilon)).ceil();
    (s as usize).max(1)
}

/// Solver accuracy `(ε/3) √(2/n³ · (1−ε)/(1+ε) · w_min/w_max)`, floored at
/// `1e-12` so the residual target stays attainable.
pub fn solver_tolerance(n: usize, epsilon: f64, w_min: f64, w_max: f64) -> f64 {
    let n = n.max(1) as f64;
    let ratio = if w_max > 0.0 { w_min / w_max } else { 1.0 };
    let delta = epsilon / 3.0 * (2.0 / n.powi(3) * (1.0 - epsilon) / (1.0 + epsilon) * ratio).sqrt();
    delta.max(1e-12)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Wall-clock durations of the embedding phases.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub sketch: Duration,
    pub solves: Duration,
    pub norm: Duration,
}

/// The `s × n` resistance embedding.
#[derive(Debug, Clone)]
pub struct ResistanceEmbedding<T: Scalar> {
    pub z: DMatrix<T>,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub timings: PhaseTimings,
    pub max_iterations: usize,
}

/// Key identifying an unordered vertex pair, used as the RNG stream so the
/// sign column of an edge depends only on `(seed, edge)`.
fn edge_stream(u: usize, v: usize) -> u64 {
    ((u as u64) << 32) | (v as u64)
}

/// Right-hand sides advanced together by the blocked solver.
const SOLVE_BLOCK: usize = 16;

/// Rows per sketch chunk: one ChaCha refill (64 words) covers a chunk.
const CHUNK_ROWS: usize = 2048;

/// Rows `CHUNK_ROWS·chunk .. + rows` of `Y = Q dA^{1/2} B`. Row `r` of the
/// chunk takes bit `r mod 32` of word `r / 32` in the edge's stream.
fn sketch_chunk<T: Scalar>(g: &GraphSnapshot<T>, seed: u64, chunk: usize, rows: usize, scale: T) -> Vec<Vec<T>> {
    let n = g.n();
    let words = rows.div_ceil(32);
    // Vertex-major so each edge touches two contiguous runs.
    let mut yt = vec![T::zero(); n * rows];
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = vec![0u32; words];
    for e in g.edges() {
        let mut rng = base.clone();
        rng.set_stream(edge_stream(e.u, e.v));
        rng.set_word_pos((chunk * CHUNK_ROWS / 32) as u128);
        bits.iter_mut().for_each(|w| *w = rng.next_u32());
        let mag = scale * e.w.sqrt();
        let signed = [-mag, mag];
        // Edges are stored with u < v.
        let (head, tail) = yt.split_at_mut(e.v * rows);
        let yu = &mut head[e.u * rows..(e.u + 1) * rows];
        let yv = &mut tail[..rows];
        for r in 0..rows {
            let q = signed[(bits[r / 32] >> (r % 32) & 1) as usize];
            yu[r] += q;
            yv[r] -= q;
        }
    }
    (0..rows).map(|r| (0..n).map(|c| yt[c * rows + r]).collect()).collect()
}

/// Builds the embedding with `s = sketch_rows(n, ε)` rows. Always sketches,
/// even when `s ≥ n`.
pub fn build_embedding<T: Scalar>(
    g: &GraphSnapshot<T>,
    epsilon: f64,
    seed: u64,
    solver: &SolverSpec,
) -> Result<ResistanceEmbedding<T>> {
    check_epsilon(epsilon)?;
    g.require_connected()?;
    let n = g.n();
    let s = sketch_rows(n, epsilon);
    let (w_min, w_max) = g
        .weight_range()
        .map_or((1.0, 1.0), |(lo, hi)| (lo.as_f64(), hi.as_f64()));
    let delta = solver_tolerance(n, epsilon, w_min, w_max);
    let spec = solver.with_tol(delta);
    let lsolver = LaplacianSolver::new(g, spec)?;
    let scale = T::one() / T::of_usize(s).sqrt();

    let start = Instant::now();
    let chunks = s.div_ceil(CHUNK_ROWS);
    let y: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| sketch_chunk(g, seed, c, (s - CHUNK_ROWS * c).min(CHUNK_ROWS), scale))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let sketch = start.elapsed();

    let start = Instant::now();
    let solved: Vec<(Vec<T>, usize)> = y
        .par_chunks(SOLVE_BLOCK)
        .map(|rows| lsolver.solve_many(rows))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .map(|(x, st)| (x, st.iterations))
        .collect();
    let solves = start.elapsed();

    let max_iterations = solved.iter().map(|(_, it)| *it).max().unwrap_or(0);
    let z = DMatrix::from_fn(s, n, |r, c| solved[r].0[c]);
    Ok(ResistanceEmbedding {
        z,
        epsilon,
        delta,
        seed,
        timings: PhaseTimings {
            sketch,
            solves,
            norm: Duration::ZERO,
        },
        max_iterations,
    })
}

impl<T: Scalar> ResistanceEmbedding<T> {
    pub fn s(&self) -> usize {
        self.z.nrows()
    }

    pub fn n(&self) -> usize {
        self.z.ncols()
    }

    /// `‖Z(e_i − e_j)‖²`.
    pub fn approx_resistance(&self, i: usize, j: usize) -> Result<T> {
        let n = self.n();
        for v in [i, j] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
        }
        if i == j {
            return Ok(T::zero());
        }
        Ok(self
            .z
            .column(i)
            .iter()
            .zip(self.z.column(j).iter())
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum())
    }

    /// Dense `R̃ = diag(G)1ᵀ + 1diag(G)ᵀ − 2G` with `G = ZᵀZ`. O(n² s).
    pub fn approx_resistance_matrix(&self) -> DMatrix<T> {
        approx_resistance_dense(&self.z)
    }
}

/// Dense sketched resistance matrix for an arbitrary `Z`.
pub fn approx_resistance_dense<T: Scalar>(z: &DMatrix<T>) -> DMatrix<T> {
    let g = z.transpose() * z;
    let n = g.nrows();
    let two = T::of(2.0);
    DMatrix::from_fn(n, n, |i, j| g[(i, i)] + g[(j, j)] - two * g[(i, j)])
}

fn frobenius_sq<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().map(|&x| x * x).sum()
}

/// `‖R̃⁽¹⁾ − R̃⁽²⁾‖_F` from the sketch matrices alone.
pub fn fast_frobenius_matrices<T: Scalar>(z1: &DMatrix<T>, z2: &DMatrix<T>) -> Result<T> {
    let n = z1.ncols();
    if z2.ncols() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: z2.ncols(),
        });
    }
    let col_sq = |z: &DMatrix<T>| -> DVector<T> {
        DVector::from_iterator(n, z.column_iter().map(|c| c.iter().map(|&x| x * x).sum()))
    };
    let d = col_sq(z1) - col_sq(z2);
    let ones = DVector::from_element(n, T::one());
    let sum_d = d.sum();
    let nt = T::of_usize(n);
    // 1ᵀ ZᵀZ d = (Z1)ᵀ (Z d)
    let quad = |z: &DMatrix<T>| (z * &ones).dot(&(z * &d));
    let cross = |a: &DMatrix<T>, b: &DMatrix<T>| frobenius_sq(&(a * b.transpose()));
    let two = T::of(2.0);
    let four = T::of(4.0);
    let radicand = two * (sum_d * sum_d + nt * d.norm_squared() + four * (quad(z2) - quad(z1)))
        + four * (cross(z1, z1) + cross(z2, z2) - two * cross(z2, z1));
    if radicand < T::zero() {
        let scale = four * (cross(z1, z1) + cross(z2, z2));
        if radicand < -T::of(1e-9) * scale.max(T::one()) {
            warn!("fast Frobenius radicand {radicand:e} is negative beyond round-off; clamping to 0");
        }
        return Ok(T::zero());
    }
    Ok(radicand.sqrt())
}

/// Fast Frobenius distance between two embeddings over the same vertex set.
pub fn fast_frobenius_distance<T: Scalar>(
    e1: &ResistanceEmbedding<T>,
    e2: &ResistanceEmbedding<T>,
) -> Result<T> {
    fast_frobenius_matrices(&e1.z, &e2.z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastRp2Options {
    pub epsilon: f64,
    pub seed: u64,
    pub solver: SolverSpec,
    /// Use the exact distance when `s ≥ n`, where sketching saves nothing.
    pub exact_fallback: bool,
}

impl Default for FastRp2Options {
    fn default() -> Self {
        FastRp2Options {
            epsilon: 0.3,
            seed: 42,
            solver: SolverSpec::default(),
            exact_fallback: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastRp2Report<T> {
    pub value: T,
    pub sketch_rows: usize,
    pub used_sketch: bool,
    pub timings: PhaseTimings,
}

/// Approximate RP-2 distance with per-phase timings.
pub fn fast_rp2_report<T: Scalar>(
    g1: &GraphSnapshot<T>,
    g2: &GraphSnapshot<T>,
    opts: &FastRp2Options,
) -> Result<FastRp2Report<T>> {
    check_epsilon(opts.epsilon)?;
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    let n = g1.n();
    let s = sketch_rows(n, opts.epsilon);
    if opts.exact_fallback && s >= n {
        let start = Instant::now();
        let value = rp_distance(g1, g2, RpOrder::TWO)?;
        return Ok(FastRp2Report {
            value,
            sketch_rows: s,
            used_sketch: false,
            timings: PhaseTimings {
                norm: start.elapsed(),
                ..PhaseTimings::default()
            },
        });
    }
    let e1 = build_embedding(g1, opts.epsilon, opts.seed, &opts.solver)?;
    let e2 = build_embedding(g2, opts.epsilon, opts.seed, &opts.solver)?;
    let start = Instant::now();
    let value = fast_frobenius_distance(&e1, &e2)?;
    Ok(FastRp2Report {
        value,
        sketch_rows: s,
        used_sketch: true,
        timings: PhaseTimings {
            sketch: e1.timings.sketch + e2.timings.sketch,
            solves: e1.timings.solves + e2.timings.solves,
            norm: start.elapsed(),
        },
    })
}

pub fn fast_rp2_distance<T: Scalar>(
    g1: &GraphSnapshot<T>,
    g2: &GraphSnapshot<T>,
    opts: &FastRp2Options,
) -> Result<T> {
    fast_rp2_report(g1, g2, opts).map(|r| r.value)
}
