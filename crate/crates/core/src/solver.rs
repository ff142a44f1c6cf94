//! Linear solves `L x = b` on the complement of the constant vector.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preconditioner {
    Jacobi,
    IncompleteCholesky,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverMethod {
    Pcg(Preconditioner),
    Direct,
}

/// Method, relative residual target `‖Lx − b‖/‖b‖` and iteration cap.
///
/// When used by the sketch, `tol` is replaced by the accuracy-derived value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub method: SolverMethod,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            method: SolverMethod::Pcg(Preconditioner::Jacobi),
            tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

impl SolverSpec {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

enum Prepared<T: Scalar> {
    Jacobi(Vec<T>),
    Ic(IncompleteCholesky<T>),
    Direct(Cholesky<T, Dyn>),
}

/// Incomplete Cholesky factor with zero fill, rows of the lower triangle.
struct IncompleteCholesky<T> {
    rows: Vec<Vec<(usize, T)>>,
    diag: Vec<T>,
}

impl<T: Scalar> IncompleteCholesky<T> {
    /// Factors `L + σI` with a small shift σ so the singular Laplacian
    /// becomes a nonsingular M-matrix, for which IC(0) cannot break down.
    fn new(g: &GraphSnapshot<T>) -> Self {
        let n = g.n();
        let degrees = g.degrees();
        let dmax = degrees.iter().copied().fold(T::zero(), |a, b| a.max(b));
        let sigma = (dmax * T::of(1e-8)).max(T::machine_eps());
        let mut rows: Vec<Vec<(usize, T)>> = Vec::with_capacity(n);
        let mut diag = vec![T::zero(); n];
        for i in 0..n {
            let mut row: Vec<(usize, T)> = g
                .neighbors(i)
                .iter()
                .filter(|&&(j, _)| j < i)
                .map(|&(j, w)| (j, -w))
                .collect();
            for idx in 0..row.len() {
                let (k, a_ik) = row[idx];
                // Σ over the shared pattern of rows i and k, columns < k.
                let mut dot = T::zero();
                let (mut p, mut q) = (0, 0);
                let rk = &rows[k];
                while p < idx && q < rk.len() {
                    let (ci, vi) = row[p];
                    let (ck, vk) = rk[q];
                    match ci.cmp(&ck) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            dot += vi * vk;
                            p += 1;
                            q += 1;
                        }
                    }
                }
                row[idx].1 = (a_ik - dot) / diag[k];
            }
            let sq: T = row.iter().map(|&(_, v)| v * v).sum();
            let pivot = degrees[i] + sigma - sq;
            diag[i] = if pivot > T::zero() { pivot.sqrt() } else { (degrees[i] + sigma).sqrt() };
            rows.push(row);
        }
        IncompleteCholesky { rows, diag }
    }

    fn apply(&self, r: &[T], z: &mut [T]) {
        let n = r.len();
        for i in 0..n {
            let mut acc = r[i];
            for &(j, v) in &self.rows[i] {
                acc -= v * z[j];
            }
            z[i] = acc / self.diag[i];
        }
        for i in (0..n).rev() {
            z[i] /= self.diag[i];
            let zi = z[i];
            for &(j, v) in &self.rows[i] {
                z[j] -= v * zi;
            }
        }
    }

    /// [`Self::apply`] on `k` vertex-major columns.
    fn apply_block(&self, r: &[T], z: &mut [T], k: usize) {
        let n = self.diag.len();
        z.copy_from_slice(r);
        for i in 0..n {
            let (done, rest) = z.split_at_mut(i * k);
            let zi = &mut rest[..k];
            for &(j, v) in &self.rows[i] {
                let zj = &done[j * k..(j + 1) * k];
                for c in 0..k {
                    zi[c] -= v * zj[c];
                }
            }
            let d = self.diag[i];
            zi.iter_mut().for_each(|x| *x /= d);
        }
        for i in (0..n).rev() {
            let (head, rest) = z.split_at_mut(i * k);
            let zi = &mut rest[..k];
            let d = self.diag[i];
            zi.iter_mut().for_each(|x| *x /= d);
            for &(j, v) in &self.rows[i] {
                let zj = &mut head[j * k..(j + 1) * k];
                for c in 0..k {
                    zj[c] -= v * zi[c];
                }
            }
        }
    }
}

/// A solver bound to one connected graph. Shareable across threads.
pub struct LaplacianSolver<'g, T: Scalar> {
    graph: &'g GraphSnapshot<T>,
    spec: SolverSpec,
    prepared: Prepared<T>,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Removes the mean, i.e. the component along the constant vector.
pub fn project_out_constant<T: Scalar>(x: &mut [T]) {
    if x.is_empty() {
        return;
    }
    let mean = x.iter().copied().sum::<T>() / T::of_usize(x.len());
    for v in x.iter_mut() {
        *v -= mean;
    }
}

impl<'g, T: Scalar> LaplacianSolver<'g, T> {
    pub fn new(graph: &'g GraphSnapshot<T>, spec: SolverSpec) -> Result<Self> {
        graph.require_connected()?;
        if !(spec.tol > 0.0) {
            return Err(Error::param(format!("solver tolerance must be positive, got {}", spec.tol)));
        }
        let prepared = match spec.method {
            SolverMethod::Pcg(Preconditioner::Jacobi) => Prepared::Jacobi(
                graph
                    .degrees()
                    .into_iter()
                    .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
                    .collect(),
            ),
            SolverMethod::Pcg(Preconditioner::IncompleteCholesky) => {
                Prepared::Ic(IncompleteCholesky::new(graph))
            }
            SolverMethod::Direct => {
                let n = graph.n();
                let shift = T::one() / T::of_usize(n.max(1));
                let m: DMatrix<T> = graph.laplacian_dense().map(|x| x + shift);
                Prepared::Direct(m.cholesky().ok_or(Error::Disconnected { components: 0 })?)
            }
        };
        Ok(LaplacianSolver {
            graph,
            spec,
            prepared,
        })
    }

    pub fn spec(&self) -> &SolverSpec {
        &self.spec
    }

    fn precondition(&self, r: &[T], z: &mut [T]) {
        match &self.prepared {
            Prepared::Jacobi(inv) => {
                for ((zi, &ri), &d) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * d;
                }
            }
            Prepared::Ic(ic) => ic.apply(r, z),
            Prepared::Direct(_) => z.copy_from_slice(r),
        }
    }

    /// Solves `L x = b` for `b` with its mean removed. The returned `x` has
    /// zero mean, so it is `L† b` up to the solver tolerance.
    pub fn solve(&self, b: &[T]) -> Result<(Vec<T>, SolveStats)> {
        let n = self.graph.n();
        if b.len() != n {
            return Err(Error::SizeMismatch {
                left: b.len(),
                right: n,
            });
        }
        let mut rhs = b.to_vec();
        project_out_constant(&mut rhs);
        if let Prepared::Direct(chol) = &self.prepared {
            let mut x: Vec<T> = chol.solve(&DVector::from_vec(rhs)).iter().copied().collect();
            project_out_constant(&mut x);
            return Ok((x, SolveStats::default()));
        }
        let bnorm = norm(&rhs);
        let mut x = vec![T::zero(); n];
        if bnorm == T::zero() {
            return Ok((x, SolveStats::default()));
        }
        let tol = T::tol(self.spec.tol);
        let mut r = rhs;
        let mut z = vec![T::zero(); n];
        self.precondition(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![T::zero(); n];
        let mut rel = T::one();
        for it in 1..=self.spec.max_iter {
            self.graph.laplacian_apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > T::zero()) {
                break;
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            rel = norm(&r) / bnorm;
            if rel <= tol {
                project_out_constant(&mut x);
                return Ok((
                    x,
                    SolveStats {
                        iterations: it,
                        residual: rel.as_f64(),
                    },
                ));
            }
            self.precondition(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::NoConvergence {
            iterations: self.spec.max_iter,
            residual: rel.as_f64(),
        })
    }
}

impl<'g, T: Scalar> LaplacianSolver<'g, T> {
    /// Solves `L x = b` for several right-hand sides at once. Each column
    /// runs its own PCG recurrence; the matrix products are shared, which
    /// cuts memory traffic on large graphs. Results match [`Self::solve`]
    /// column by column up to round-off.
    pub fn solve_many(&self, rhs: &[Vec<T>]) -> Result<Vec<(Vec<T>, SolveStats)>> {
        let n = self.graph.n();
        let k = rhs.len();
        if let Some(b) = rhs.iter().find(|b| b.len() != n) {
            return Err(Error::SizeMismatch {
                left: b.len(),
                right: n,
            });
        }
        if k <= 1 || matches!(self.prepared, Prepared::Direct(_)) {
            return rhs.iter().map(|b| self.solve(b)).collect();
        }
        let tol = T::tol(self.spec.tol);
        // Vertex-major blocks: entry (i, c) lives at i·k + c.
        let mut r = vec![T::zero(); n * k];
        let mut bnorm = vec![T::zero(); k];
        for (c, b) in rhs.iter().enumerate() {
            let mut col = b.clone();
            project_out_constant(&mut col);
            bnorm[c] = norm(&col);
            for i in 0..n {
                r[i * k + c] = col[i];
            }
        }
        let mut x = vec![T::zero(); n * k];
        let mut z = vec![T::zero(); n * k];
        let mut stats = vec![SolveStats::default(); k];
        let mut active: Vec<bool> = bnorm.iter().map(|&b| b > T::zero()).collect();
        self.precondition_block(&r, &mut z, k);
        let mut p = z.clone();
        let mut rz = column_dots(&r, &z, k);
        let mut ap = vec![T::zero(); n * k];
        let mut rel: Vec<T> = active.iter().map(|&a| if a { T::one() } else { T::zero() }).collect();
        for it in 1..=self.spec.max_iter {
            if !active.iter().any(|&a| a) {
                break;
            }
            self.graph.laplacian_apply_block(&p, &mut ap, k);
            let pap = column_dots(&p, &ap, k);
            let alpha: Vec<T> = (0..k)
                .map(|c| {
                    if active[c] && pap[c] > T::zero() {
                        rz[c] / pap[c]
                    } else {
                        T::zero()
                    }
                })
                .collect();
            for i in 0..n {
                for c in 0..k {
                    x[i * k + c] += alpha[c] * p[i * k + c];
                    r[i * k + c] -= alpha[c] * ap[i * k + c];
                }
            }
            let rr = column_dots(&r, &r, k);
            for c in 0..k {
                if !active[c] {
                    continue;
                }
                rel[c] = rr[c].sqrt() / bnorm[c];
                if rel[c] <= tol || !(pap[c] > T::zero()) {
                    active[c] = false;
                    stats[c] = SolveStats {
                        iterations: it,
                        residual: rel[c].as_f64(),
                    };
                }
            }
            self.precondition_block(&r, &mut z, k);
            let rz_new = column_dots(&r, &z, k);
            for c in 0..k {
                let beta = if active[c] { rz_new[c] / rz[c] } else { T::zero() };
                rz[c] = rz_new[c];
                for i in 0..n {
                    let idx = i * k + c;
                    p[idx] = if active[c] { z[idx] + beta * p[idx] } else { T::zero() };
                }
            }
        }
        if let Some(c) = (0..k).find(|&c| active[c] || rel[c] > tol) {
            return Err(Error::NoConvergence {
                iterations: self.spec.max_iter,
                residual: rel[c].as_f64(),
            });
        }
        Ok((0..k)
            .map(|c| {
                let mut col: Vec<T> = (0..n).map(|i| x[i * k + c]).collect();
                project_out_constant(&mut col);
                (col, stats[c])
            })
            .collect())
    }

    fn precondition_block(&self, r: &[T], z: &mut [T], k: usize) {
        match &self.prepared {
            Prepared::Jacobi(inv) => {
                for (i, &d) in inv.iter().enumerate() {
                    for c in 0..k {
                        z[i * k + c] = r[i * k + c] * d;
                    }
                }
            }
            Prepared::Ic(ic) => ic.apply_block(r, z, k),
            Prepared::Direct(_) => z.copy_from_slice(r),
        }
    }
}

/// Per-column inner products of two vertex-major blocks.
fn column_dots<T: Scalar>(a: &[T], b: &[T], k: usize) -> Vec<T> {
    let mut out = vec![T::zero(); k];
    for (ra, rb) in a.chunks_exact(k).zip(b.chunks_exact(k)) {
        for c in 0..k {
            out[c] += ra[c] * rb[c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::pseudo_inverse;

    fn grid(side: usize) -> GraphSnapshot<f64> {
        let mut t = Vec::new();
        for r in 0..side {
            for c in 0..side {
                let v = r * side + c;
                if c + 1 < side {
                    t.push((v, v + 1, 1.0 + (v % 3) as f64));
                }
                if r + 1 < side {
                    t.push((v, v + side, 0.5));
                }
            }
        }
        GraphSnapshot::new(side * side, t).unwrap()
    }

    fn check_method(method: SolverMethod) {
        let g = grid(6);
        let n = g.n();
        let ldag = pseudo_inverse(&g.laplacian()).unwrap().ldag;
        let b: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let spec = SolverSpec {
            method,
            ..SolverSpec::default()
        };
        let solver = LaplacianSolver::new(&g, spec).unwrap();
        let (x, _) = solver.solve(&b).unwrap();
        let want = &ldag * DVector::from_vec(b);
        for i in 0..n {
            assert!((x[i] - want[i]).abs() < 1e-7, "{method:?} at {i}");
        }
    }

    #[test]
    fn jacobi_pcg_matches_pseudoinverse() {
        check_method(SolverMethod::Pcg(Preconditioner::Jacobi));
    }

    #[test]
    fn ic_pcg_matches_pseudoinverse() {
        check_method(SolverMethod::Pcg(Preconditioner::IncompleteCholesky));
    }

    #[test]
    fn direct_matches_pseudoinverse() {
        check_method(SolverMethod::Direct);
    }

    #[test]
    fn ic_needs_fewer_iterations_than_jacobi() {
        let g = grid(12);
        let b: Vec<f64> = (0..g.n()).map(|i| (i as f64).sin()).collect();
        let iters = |p| {
            let spec = SolverSpec {
                method: SolverMethod::Pcg(p),
                ..SolverSpec::default()
            };
            LaplacianSolver::new(&g, spec).unwrap().solve(&b).unwrap().1.iterations
        };
        assert!(iters(Preconditioner::IncompleteCholesky) < iters(Preconditioner::Jacobi));
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let g = grid(8);
        let spec = SolverSpec {
            max_iter: 2,
            ..SolverSpec::default()
        };
        let b: Vec<f64> = (0..g.n()).map(|i| i as f64).collect();
        let err = LaplacianSolver::new(&g, spec).unwrap().solve(&b).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 2, .. }));
    }

    #[test]
    fn block_solve_matches_single_solves() {
        let g = grid(7);
        let n = g.n();
        let rhs: Vec<Vec<f64>> = (0..5)
            .map(|c| (0..n).map(|i| ((i * (c + 3)) % 7) as f64 - 3.0).collect())
            .chain(std::iter::once(vec![1.0; n]))
            .collect();
        for pc in [Preconditioner::Jacobi, Preconditioner::IncompleteCholesky] {
            let spec = SolverSpec {
                method: SolverMethod::Pcg(pc),
                ..SolverSpec::default()
            };
            let solver = LaplacianSolver::new(&g, spec).unwrap();
            let many = solver.solve_many(&rhs).unwrap();
            for (b, (x, st)) in rhs.iter().zip(&many) {
                let (want, one) = solver.solve(b).unwrap();
                assert_eq!(st.iterations, one.iterations);
                for i in 0..n {
                    assert!((x[i] - want[i]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn disconnected_rejected() {
        let g = GraphSnapshot::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(LaplacianSolver::new(&g, SolverSpec::default()).is_err());
    }
}
