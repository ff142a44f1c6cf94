//! Comparison distances: DeltaCon₀, CAD, edit distance and spectral distance.

use log::debug;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::resistance::{resistance_matrix, ResistanceMatrix};
use crate::scalar::Scalar;

fn same_size<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>) -> Result<()> {
    if g1.n() != g2.n() {
        return Err(Error::SizeMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    Ok(())
}

/// Fast belief propagation matrix `S = [I + ε²D − εA]⁻¹`, `ε = 1/(1 + max D)`.
#[derive(Debug, Clone)]
pub struct FbpMatrix<T: Scalar> {
    pub s: DMatrix<T>,
    pub eps: T,
}

impl<T: Scalar> FbpMatrix<T> {
    pub fn new(g: &GraphSnapshot<T>) -> Self {
        let n = g.n();
        let degrees = g.degrees();
        let dmax = degrees.iter().copied().fold(T::zero(), |a, b| a.max(b));
        let eps = T::one() / (T::one() + dmax);
        let mut m = g.adjacency_dense() * (-eps);
        for i in 0..n {
            m[(i, i)] += T::one() + eps * eps * degrees[i];
        }
        // Strictly diagonally dominant with positive diagonal, hence SPD.
        let s = m.cholesky().expect("FBP system is positive definite").inverse();
        let s = (&s + s.transpose()) * T::of(0.5);
        FbpMatrix { s, eps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCon<T> {
    pub similarity: T,
    pub rooted: T,
}

/// `√Σ (√S⁽¹⁾_ij − √S⁽²⁾_ij)²` with entries clamped at `floor` before the
/// square root; round-off can leave tiny negatives.
pub fn rooted_distance<T: Scalar>(s1: &DMatrix<T>, s2: &DMatrix<T>, floor: T) -> T {
    let mut clamped = 0usize;
    let mut root = |x: T| {
        if x < floor {
            clamped += 1;
            floor.sqrt()
        } else {
            x.sqrt()
        }
    };
    let mut sum = T::zero();
    for (&a, &b) in s1.iter().zip(s2.iter()) {
        let d = root(a) - root(b);
        sum += d * d;
    }
    if clamped > 0 {
        debug!("clamped {clamped} FBP entries below {floor:e}");
    }
    sum.sqrt()
}

/// DeltaCon₀ with a configurable clamp floor for `S`.
pub fn deltacon0_with_floor<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>, floor: T) -> Result<DeltaCon<T>> {
    same_size(g1, g2)?;
    let rooted = rooted_distance(&FbpMatrix::new(g1).s, &FbpMatrix::new(g2).s, floor);
    Ok(DeltaCon {
        similarity: T::one() / (T::one() + rooted),
        rooted,
    })
}

pub fn deltacon0<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>) -> Result<DeltaCon<T>> {
    deltacon0_with_floor(g1, g2, T::zero())
}

/// Pairs over which CAD sums.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum CadScope {
    /// Union of both edge sets.
    #[default]
    EdgeUnion,
    AllPairs,
    Pairs(Vec<(usize, usize)>),
}

/// `Σ_{u<v ∈ F} |ΔA_uv| · |Δκ_uv|` with commute times `κ = 2 vol R`.
pub fn cad_distance<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>, scope: &CadScope) -> Result<T> {
    same_size(g1, g2)?;
    let r1 = resistance_matrix(g1)?;
    let r2 = resistance_matrix(g2)?;
    cad_from_resistance(g1, &r1, g2, &r2, scope)
}

/// CAD from precomputed resistance matrices of both graphs.
pub fn cad_from_resistance<T: Scalar>(
    g1: &GraphSnapshot<T>,
    r1: &ResistanceMatrix<T>,
    g2: &GraphSnapshot<T>,
    r2: &ResistanceMatrix<T>,
    scope: &CadScope,
) -> Result<T> {
    same_size(g1, g2)?;
    let n = g1.n();
    let two = T::of(2.0);
    let (v1, v2) = (two * g1.total_weight(), two * g2.total_weight());
    let term = |u: usize, v: usize| {
        let w1 = g1.weight(u, v).unwrap_or_else(T::zero);
        let w2 = g2.weight(u, v).unwrap_or_else(T::zero);
        (w1 - w2).abs() * (v1 * r1.get(u, v) - v2 * r2.get(u, v)).abs()
    };
    let mut pairs: Vec<(usize, usize)> = match scope {
        CadScope::AllPairs => (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect(),
        CadScope::EdgeUnion => g1.edges().iter().chain(g2.edges()).map(|e| (e.u, e.v)).collect(),
        CadScope::Pairs(list) => {
            let mut out = Vec::with_capacity(list.len());
            for &(u, v) in list {
                g1.check_vertex(u)?;
                g1.check_vertex(v)?;
                if u != v {
                    out.push((u.min(v), u.max(v)));
                }
            }
            out
        }
    };
    pairs.sort_unstable();
    pairs.dedup();
    Ok(pairs.into_iter().map(|(u, v)| term(u, v)).sum())
}

/// `Σ_{i,j} |A⁽¹⁾_ij − A⁽²⁾_ij|` over ordered pairs.
pub fn edit_distance<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>) -> Result<T> {
    same_size(g1, g2)?;
    let mut sum = T::zero();
    for e in g1.edges() {
        let other = g2.weight(e.u, e.v).unwrap_or_else(T::zero);
        sum += (e.w - other).abs();
    }
    for e in g2.edges() {
        if !g1.has_edge(e.u, e.v) {
            sum += e.w;
        }
    }
    Ok(T::of(2.0) * sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SpectrumKind {
    #[default]
    Laplacian,
    Adjacency,
}

pub fn sorted_spectrum<T: Scalar>(g: &GraphSnapshot<T>, kind: SpectrumKind) -> Vec<T> {
    let m = match kind {
        SpectrumKind::Laplacian => g.laplacian_dense(),
        SpectrumKind::Adjacency => g.adjacency_dense(),
    };
    let mut vals: Vec<T> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Euclidean distance between sorted spectra.
pub fn lambda_distance<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>, kind: SpectrumKind) -> Result<T> {
    same_size(g1, g2)?;
    let a = sorted_spectrum(g1, kind);
    let b = sorted_spectrum(g2, kind);
    Ok(a.iter().zip(&b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::commute_time;

    fn unit(n: usize, edges: &[(usize, usize)]) -> GraphSnapshot<f64> {
        GraphSnapshot::new(n, edges.iter().map(|&(i, j)| (i, j, 1.0))).unwrap()
    }

    fn complete(n: usize) -> GraphSnapshot<f64> {
        let e: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        unit(n, &e)
    }

    #[test]
    fn fbp_solves_its_system() {
        let g = unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]);
        let f = FbpMatrix::new(&g);
        assert!((f.eps - 0.25).abs() < 1e-15);
        let mut m = g.adjacency_dense() * (-f.eps);
        for i in 0..5 {
            m[(i, i)] += 1.0 + f.eps * f.eps * g.degree(i);
        }
        assert!((m * &f.s - DMatrix::identity(5, 5)).abs().max() < 1e-10);
    }

    #[test]
    fn deltacon_identity() {
        let g = complete(6);
        let d = deltacon0(&g, &g).unwrap();
        assert_eq!(d.rooted, 0.0);
        assert_eq!(d.similarity, 1.0);
        let h = g.with_weight_delta(0, 1, 1.0).unwrap();
        let d = deltacon0(&g, &h).unwrap();
        assert!(d.rooted > 0.0 && d.similarity < 1.0 && d.similarity > 0.0);
        assert!(deltacon0(&g, &complete(5)).is_err());
    }

    #[test]
    fn cad_cases() {
        let g = complete(4);
        assert_eq!(cad_distance(&g, &g, &CadScope::AllPairs).unwrap(), 0.0);
        let h = g.with_weight_delta(0, 1, -1.0).unwrap();
        let want = (commute_time(&h, 0, 1).unwrap() - commute_time(&g, 0, 1).unwrap()).abs();
        let got = cad_distance(&g, &h, &CadScope::AllPairs).unwrap();
        assert!((got - want).abs() < 1e-10);
        assert!((cad_distance(&h, &g, &CadScope::EdgeUnion).unwrap() - want).abs() < 1e-10);
        assert_eq!(cad_distance(&g, &h, &CadScope::Pairs(vec![(2, 3)])).unwrap(), 0.0);
        let split = unit(4, &[(0, 1), (2, 3)]);
        assert!(cad_distance(&g, &split, &CadScope::AllPairs).is_err());
    }

    #[test]
    fn edit_cases() {
        let g = unit(3, &[(0, 1), (1, 2)]);
        assert_eq!(edit_distance(&g, &g).unwrap(), 0.0);
        let h = g.with_weight_delta(0, 1, 1.0).unwrap();
        assert_eq!(edit_distance(&g, &h).unwrap(), 2.0);
        let k = g.with_weight_delta(0, 2, 0.5).unwrap();
        assert_eq!(edit_distance(&g, &k).unwrap(), 1.0);
    }

    #[test]
    fn lambda_cases() {
        let k3 = complete(3);
        let p3 = unit(3, &[(0, 1), (1, 2)]);
        assert!(lambda_distance(&k3, &k3, SpectrumKind::Laplacian).unwrap().abs() < 1e-12);
        assert!((lambda_distance(&k3, &p3, SpectrumKind::Laplacian).unwrap() - 2.0).abs() < 1e-10);
        // Adjacency spectra {2,-1,-1} vs {√2,0,-√2}.
        let want = ((2.0 - 2f64.sqrt()).powi(2) + 1.0 + (2f64.sqrt() - 1.0).powi(2)).sqrt();
        assert!((lambda_distance(&k3, &p3, SpectrumKind::Adjacency).unwrap() - want).abs() < 1e-10);
    }
}
