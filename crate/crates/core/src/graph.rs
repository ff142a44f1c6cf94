//! Weighted undirected graphs and their matrix views.

use std::collections::{BTreeMap, VecDeque};

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub u: usize,
    pub v: usize,
    pub w: T,
}

/// A weighted undirected graph on the vertex set `0..n`.
///
/// Edges are kept sorted by `(u, v)` with `u < v`, and a CSR neighbor index
/// is built once at construction. The snapshot is immutable afterwards.
#[derive(Debug, Clone)]
pub struct GraphSnapshot<T> {
    n: usize,
    edges: Vec<Edge<T>>,
    offsets: Vec<usize>,
    adjacency: Vec<(usize, T)>,
    label: Option<String>,
}

impl<T: Scalar> GraphSnapshot<T> {
    /// Builds a snapshot from `(i, j, w)` triples.
    ///
    /// Orientation is irrelevant. A pair listed several times with one common
    /// weight is a symmetric listing and kept once; differing weights are summed.
    pub fn new<I>(n: usize, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, T)>,
    {
        let mut by_pair: BTreeMap<(usize, usize), Vec<T>> = BTreeMap::new();
        for (i, j, w) in triples {
            if i >= n || j >= n {
                return Err(Error::VertexOutOfRange { vertex: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            if !(w > T::zero()) || !w.is_finite_value() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) has non-positive or non-finite weight {w}"
                )));
            }
            by_pair.entry((i.min(j), i.max(j))).or_default().push(w);
        }
        let edges = by_pair
            .into_iter()
            .map(|((u, v), ws)| {
                let first = ws[0];
                let w = if ws.iter().all(|&x| x == first) {
                    first
                } else {
                    warn!("edge ({u}, {v}) listed {} times with different weights; summing", ws.len());
                    ws.iter().copied().sum()
                };
                Edge { u, v, w }
            })
            .collect();
        Ok(Self::from_canonical(n, edges))
    }

    /// Builds from edges already canonical (u < v, sorted, unique, positive).
    fn from_canonical(n: usize, edges: Vec<Edge<T>>) -> Self {
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0usize, T::zero()); offsets[n]];
        for e in &edges {
            adjacency[fill[e.u]] = (e.v, e.w);
            fill[e.u] += 1;
            adjacency[fill[e.v]] = (e.u, e.w);
            fill[e.v] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_by_key(|&(j, _)| j);
        }
        GraphSnapshot {
            n,
            edges,
            offsets,
            adjacency,
            label: None,
        }
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, Vec::new())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, T)] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Weighted degree `D_ii`.
    pub fn degree(&self, i: usize) -> T {
        self.neighbors(i).iter().map(|&(_, w)| w).sum()
    }

    pub fn degrees(&self) -> Vec<T> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<T> {
        let nb = self.neighbors(i);
        nb.binary_search_by_key(&j, |&(k, _)| k).ok().map(|idx| nb[idx].1)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j).is_some()
    }

    /// Sum of edge weights (the volume used for commute times).
    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn weight_range(&self) -> Option<(T, T)> {
        let mut it = self.edges.iter().map(|e| e.w);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), w| (lo.min(w), hi.max(w))))
    }

    pub(crate) fn check_vertex(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: i, n: self.n })
        }
    }

    /// Component id of every vertex, ids assigned in order of first vertex.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut comp = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in self.neighbors(x) {
                    if comp[y] == usize::MAX {
                        comp[y] = count;
                        queue.push_back(y);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().0 == 1
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        let (c, _) = self.components();
        if self.n > 1 && c != 1 {
            Err(Error::Disconnected { components: c })
        } else {
            Ok(())
        }
    }

    /// Dense symmetric adjacency matrix.
    pub fn adjacency_dense(&self) -> DMatrix<T> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.u, e.v)] = e.w;
            a[(e.v, e.u)] = e.w;
        }
        a
    }

    /// Dense combinatorial Laplacian `D - A`.
    pub fn laplacian_dense(&self) -> DMatrix<T> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            l[(e.u, e.v)] -= e.w;
            l[(e.v, e.u)] -= e.w;
            l[(e.u, e.u)] += e.w;
            l[(e.v, e.v)] += e.w;
        }
        l
    }

    /// `y = L x` using the sparse neighbor index.
    pub fn laplacian_apply(&self, x: &[T], y: &mut [T]) {
        for i in 0..self.n {
            let xi = x[i];
            let mut acc = T::zero();
            for &(j, w) in self.neighbors(i) {
                acc += w * (xi - x[j]);
            }
            y[i] = acc;
        }
    }

    /// `Y = L X` for `k` vectors stored vertex-major (`x[i·k + c]`), so the
    /// neighbor index is streamed once for all of them.
    pub fn laplacian_apply_block(&self, x: &[T], y: &mut [T], k: usize) {
        for i in 0..self.n {
            let yi = &mut y[i * k..(i + 1) * k];
            yi.fill(T::zero());
            let xi = &x[i * k..(i + 1) * k];
            for &(j, w) in self.neighbors(i) {
                let xj = &x[j * k..(j + 1) * k];
                for c in 0..k {
                    yi[c] += w * (xi[c] - xj[c]);
                }
            }
        }
    }

    /// All matrix views of the graph, materialized densely.
    pub fn laplacian(&self) -> LaplacianView<T> {
        let m = self.edges.len();
        let mut incidence = DMatrix::zeros(m, self.n);
        for (k, e) in self.edges.iter().enumerate() {
            incidence[(k, e.u)] = T::one();
            incidence[(k, e.v)] = -T::one();
        }
        let adjacency = self.adjacency_dense();
        let degrees = DVector::from_iterator(self.n, (0..self.n).map(|i| self.degree(i)));
        LaplacianView {
            laplacian: self.laplacian_dense(),
            adjacency,
            degrees,
            incidence,
            edge_weights: DVector::from_iterator(m, self.edges.iter().map(|e| e.w)),
        }
    }

    /// The graph with weight `w_ij + dw` on pair `(i, j)`. A resulting weight
    /// of zero (up to round-off) removes the edge; negative is an error.
    pub fn with_weight_delta(&self, i: usize, j: usize, dw: T) -> Result<Self> {
        self.check_vertex(i)?;
        self.check_vertex(j)?;
        if i == j {
            return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
        }
        let (u, v) = (i.min(j), i.max(j));
        let old = self.weight(u, v).unwrap_or_else(T::zero);
        let new = old + dw;
        let scale = old.abs().max(dw.abs()).max(T::one());
        let zero_tol = T::machine_eps() * T::of(16.0) * scale;
        if new < -zero_tol {
            return Err(Error::param(format!(
                "perturbation {dw} on ({u}, {v}) makes weight {old} negative"
            )));
        }
        let mut edges: Vec<Edge<T>> = self
            .edges
            .iter()
            .copied()
            .filter(|e| !(e.u == u && e.v == v))
            .collect();
        if new > zero_tol {
            let pos = edges.partition_point(|e| (e.u, e.v) < (u, v));
            edges.insert(pos, Edge { u, v, w: new });
        }
        let mut g = Self::from_canonical(self.n, edges);
        g.label = self.label.clone();
        Ok(g)
    }

    /// Appends `extra` isolated vertices.
    pub fn with_isolated(&self, extra: usize) -> Self {
        let mut g = Self::from_canonical(self.n + extra, self.edges.clone());
        g.label = self.label.clone();
        g
    }

    /// Relabels vertex `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::SizeMismatch {
                left: perm.len(),
                right: self.n,
            });
        }
        Self::new(
            self.n,
            self.edges.iter().map(|e| (perm[e.u], perm[e.v], e.w)),
        )
    }

    /// Subgraph induced by `vertices` (in the given order).
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &v) in vertices.iter().enumerate() {
            pos[v] = k;
        }
        let mut edges: Vec<Edge<T>> = self
            .edges
            .iter()
            .filter(|e| pos[e.u] != usize::MAX && pos[e.v] != usize::MAX)
            .map(|e| {
                let (a, b) = (pos[e.u], pos[e.v]);
                Edge {
                    u: a.min(b),
                    v: a.max(b),
                    w: e.w,
                }
            })
            .collect();
        edges.sort_by_key(|e| (e.u, e.v));
        Self::from_canonical(vertices.len(), edges)
    }

    /// Converts weights to another scalar type.
    pub fn cast<U: Scalar>(&self) -> GraphSnapshot<U> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                u: e.u,
                v: e.v,
                w: U::of(e.w.as_f64()),
            })
            .collect();
        let mut g = GraphSnapshot::from_canonical(self.n, edges);
        g.label = self.label.clone();
        g
    }
}

impl<T: Scalar> PartialEq for GraphSnapshot<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

/// Dense matrix views of a graph: `A`, `D`, `L = D - A`, the signed incidence
/// `B` (tail = smaller id) and the edge weight vector `dA`.
#[derive(Debug, Clone)]
pub struct LaplacianView<T: Scalar> {
    pub adjacency: DMatrix<T>,
    pub degrees: DVector<T>,
    pub laplacian: DMatrix<T>,
    pub incidence: DMatrix<T>,
    pub edge_weights: DVector<T>,
}

impl<T: Scalar> LaplacianView<T> {
    pub fn n(&self) -> usize {
        self.laplacian.nrows()
    }

    /// `Bᵀ diag(dA) B`, which must equal `L`.
    pub fn incidence_product(&self) -> DMatrix<T> {
        let weighted = DMatrix::from_fn(self.incidence.nrows(), self.incidence.ncols(), |r, c| {
            self.incidence[(r, c)] * self.edge_weights[r]
        });
        self.incidence.transpose() * weighted
    }

    /// Connected component count, read off the adjacency matrix.
    pub fn component_count(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for y in 0..n {
                    if !seen[y] && self.adjacency[(x, y)] != T::zero() {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        count
    }

    /// Rebuilds the graph the view describes.
    pub fn to_graph(&self) -> Result<GraphSnapshot<T>> {
        let n = self.n();
        let mut triples = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.adjacency[(i, j)];
                if w > T::zero() {
                    triples.push((i, j, w));
                }
            }
        }
        GraphSnapshot::new(n, triples)
    }
}
