//! Laplacian eigenpairs: full dense spectrum or the smallest `p` pairs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::scalar::Scalar;
use crate::solver::{LaplacianSolver, SolverSpec};

/// Below this size the partial solver just truncates the dense spectrum.
pub const DENSE_LIMIT: usize = 300;

/// Ascending eigenvalues `λ₁ = 0 ≤ λ₂ ≤ …` with orthonormal eigenvectors as
/// columns of `phis`. `lambda_max` is `λ_n` when known and otherwise the
/// Gershgorin bound `2 max D_ii`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Scalar> {
    pub lambdas: DVector<T>,
    pub phis: DMatrix<T>,
    pub lambda_max: T,
    pub lambda_max_exact: bool,
}

impl<T: Scalar> SpectralDecomposition<T> {
    pub fn n(&self) -> usize {
        self.phis.nrows()
    }

    /// Number of computed pairs, counting the zero pair.
    pub fn p(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_full(&self) -> bool {
        self.p() == self.n()
    }

    /// Leading `p` pairs of this decomposition, keeping its `λ_n` information.
    pub fn truncated(&self, p: usize) -> Self {
        let p = p.min(self.p());
        SpectralDecomposition {
            lambdas: self.lambdas.rows(0, p).into_owned(),
            phis: self.phis.columns(0, p).into_owned(),
            lambda_max: self.lambda_max,
            lambda_max_exact: self.lambda_max_exact,
        }
    }

    /// Same pairs, but with `λ_n` replaced by a Gershgorin bound `bound`.
    pub fn with_lambda_max_bound(mut self, bound: T) -> Self {
        if !self.is_full() {
            self.lambda_max = bound;
            self.lambda_max_exact = false;
        }
        self
    }

    /// `max_k ‖Lφ_k − λ_kφ_k‖`.
    pub fn max_residual(&self, g: &GraphSnapshot<T>) -> T {
        let n = self.n();
        let mut out = vec![T::zero(); n];
        let mut worst = T::zero();
        for k in 0..self.p() {
            let phi: Vec<T> = self.phis.column(k).iter().copied().collect();
            g.laplacian_apply(&phi, &mut out);
            let r: T = (0..n)
                .map(|i| {
                    let d = out[i] - self.lambdas[k] * phi[i];
                    d * d
                })
                .sum();
            worst = worst.max(r.sqrt());
        }
        worst
    }
}

/// `2 · max_i D_ii ≥ λ_n`.
pub fn gershgorin_bound<T: Scalar>(g: &GraphSnapshot<T>) -> T {
    T::of(2.0) * g.degrees().into_iter().fold(T::zero(), |a, b| a.max(b))
}

/// Flips each eigenvector so its largest-magnitude entry (first on ties) is positive.
fn fix_signs<T: Scalar>(phis: &mut DMatrix<T>) {
    for mut col in phis.column_iter_mut() {
        let mut best = 0;
        for i in 0..col.len() {
            if col[i].abs() > col[best].abs() * (T::one() + T::of(1e-9)) {
                best = i;
            }
        }
        if col.len() > 0 && col[best] < T::zero() {
            col.neg_mut();
        }
    }
}

fn sorted_eigen<T: Scalar>(m: DMatrix<T>) -> (Vec<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, c| eig.eigenvectors[(i, order[c])]);
    (vals, vecs)
}

/// All `n` eigenpairs via a dense symmetric eigensolver. Requires a connected graph.
pub fn full_spectrum<T: Scalar>(g: &GraphSnapshot<T>) -> Result<SpectralDecomposition<T>> {
    g.require_connected()?;
    let n = g.n();
    let (mut vals, mut vecs) = sorted_eigen(g.laplacian_dense());
    if n > 0 {
        // Pin the null pair exactly.
        vals[0] = T::zero();
        let c = T::one() / T::of_usize(n).sqrt();
        vecs.column_mut(0).fill(c);
    }
    fix_signs(&mut vecs);
    let lambda_max = vals.last().copied().unwrap_or_else(T::zero);
    Ok(SpectralDecomposition {
        lambdas: DVector::from_vec(vals),
        phis: vecs,
        lambda_max,
        lambda_max_exact: true,
    })
}

/// The smallest `p` eigenpairs (the zero pair included). Small graphs use the
/// dense solver; larger ones use [`partial_spectrum_krylov`].
pub fn partial_spectrum<T: Scalar>(g: &GraphSnapshot<T>, p: usize, seed: u64) -> Result<SpectralDecomposition<T>> {
    if p < 2 {
        return Err(Error::param(format!("need at least 2 eigenpairs, got {p}")));
    }
    let p = p.min(g.n());
    if g.n() <= DENSE_LIMIT || p == g.n() {
        let full = full_spectrum(g)?;
        let bound = gershgorin_bound(g);
        Ok(full.truncated(p).with_lambda_max_bound(bound))
    } else {
        partial_spectrum_krylov(g, p, seed)
    }
}

fn orthonormalize_against<T: Scalar>(v: &mut DVector<T>, basis: &[DVector<T>]) -> T {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for b in basis {
            let c = b.dot(v);
            v.axpy(-c, b, T::one());
        }
    }
    let nrm = v.norm();
    if nrm > T::zero() {
        *v /= nrm;
    }
    nrm
}

/// Block Krylov iteration on `L†` (applied through PCG solves) with full
/// reorthogonalization and Rayleigh-Ritz on `VᵀLV`. Stops once every wanted
/// Ritz pair has residual `≤ 1e-7 ‖L‖`.
pub fn partial_spectrum_krylov<T: Scalar>(
    g: &GraphSnapshot<T>,
    p: usize,
    seed: u64,
) -> Result<SpectralDecomposition<T>> {
    if p < 2 {
        return Err(Error::param(format!("need at least 2 eigenpairs, got {p}")));
    }
    let n = g.n();
    let p = p.min(n);
    let solver = LaplacianSolver::new(g, SolverSpec::default().with_tol(1e-12))?;
    let lnorm = gershgorin_bound(g);
    let tol = T::tol(1e-7) * lnorm;
    let wanted = p - 1;
    let block = wanted + 2;
    let cap = (n - 1).min(wanted * 40 + 60);

    let ones = DVector::from_element(n, T::one() / T::of_usize(n).sqrt());
    let mut basis: Vec<DVector<T>> = vec![ones.clone()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frontier: Vec<DVector<T>> = Vec::new();
    for _ in 0..block {
        let mut v = DVector::from_fn(n, |_, _| T::of(rng.random_range(-1.0..1.0)));
        if orthonormalize_against(&mut v, &basis) > T::zero() {
            basis.push(v.clone());
            frontier.push(v);
        }
    }
    let mut tmp = vec![T::zero(); n];
    loop {
        // Rayleigh-Ritz on span(basis \ {1}).
        let k = basis.len() - 1;
        let v = DMatrix::from_fn(n, k, |i, c| basis[c + 1][i]);
        let mut lv = DMatrix::zeros(n, k);
        for c in 0..k {
            let col: Vec<T> = v.column(c).iter().copied().collect();
            g.laplacian_apply(&col, &mut tmp);
            lv.column_mut(c).copy_from_slice(&tmp);
        }
        let h = v.transpose() * &lv;
        let h = (&h + h.transpose()) * T::of(0.5);
        let (vals, vecs) = sorted_eigen(h);
        let take = wanted.min(k);
        let ritz = &v * vecs.columns(0, take);
        let lritz = &lv * vecs.columns(0, take);
        let converged = take == wanted
            && (0..take).all(|c| (lritz.column(c) - ritz.column(c) * vals[c]).norm() <= tol);
        if converged || basis.len() >= cap + 1 {
            if !converged {
                let worst = (0..take)
                    .map(|c| (lritz.column(c) - ritz.column(c) * vals[c]).norm().as_f64())
                    .fold(0.0, f64::max);
                return Err(Error::NoConvergence {
                    iterations: basis.len(),
                    residual: worst / lnorm.as_f64(),
                });
            }
            let mut phis = DMatrix::zeros(n, p);
            phis.column_mut(0).copy_from(&ones);
            for c in 0..wanted {
                phis.column_mut(c + 1).copy_from(&ritz.column(c));
            }
            fix_signs(&mut phis);
            let mut lambdas = DVector::zeros(p);
            for c in 0..wanted {
                lambdas[c + 1] = vals[c];
            }
            return Ok(SpectralDecomposition {
                lambdas,
                phis,
                lambda_max: lnorm,
                lambda_max_exact: false,
            });
        }
        let mut next = Vec::new();
        for f in &frontier {
            let rhs: Vec<T> = f.iter().copied().collect();
            let (x, _) = solver.solve(&rhs)?;
            let mut w = DVector::from_vec(x);
            if basis.len() > cap {
                break;
            }
            if orthonormalize_against(&mut w, &basis) > T::tol(1e-10) {
                basis.push(w.clone());
                next.push(w);
            }
        }
        if next.is_empty() {
            return Err(Error::NoConvergence {
                iterations: basis.len(),
                residual: f64::NAN,
            });
        }
        frontier = next;
    }
}
