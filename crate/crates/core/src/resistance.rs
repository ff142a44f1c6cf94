//! Exact effective resistances from the dense Laplacian pseudoinverse.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{GraphSnapshot, LaplacianView};
use crate::scalar::Scalar;

/// Dense Moore-Penrose pseudoinverse of a connected graph's Laplacian.
#[derive(Debug, Clone)]
pub struct PseudoInverse<T: Scalar> {
    pub ldag: DMatrix<T>,
}

/// Effective resistances over all vertex pairs.
#[derive(Debug, Clone)]
pub struct ResistanceMatrix<T: Scalar> {
    pub r: DMatrix<T>,
    /// Sum over ordered pairs, so each unordered pair counts twice.
    pub kirchhoff: T,
}

/// `R / (1 + R)` within components and `1` across them.
#[derive(Debug, Clone)]
pub struct RenormalizedResistanceMatrix<T: Scalar> {
    pub rhat: DMatrix<T>,
}

fn shifted_factor<T: Scalar>(l: &DMatrix<T>) -> Option<nalgebra::Cholesky<T, nalgebra::Dyn>> {
    let n = l.nrows();
    let shift = T::one() / T::of_usize(n);
    l.map(|x| x + shift).cholesky()
}

/// `L† = (L + J/n)⁻¹ − J/n`, symmetrized.
pub fn pseudo_inverse<T: Scalar>(view: &LaplacianView<T>) -> Result<PseudoInverse<T>> {
    let n = view.n();
    let components = view.component_count();
    if n > 1 && components != 1 {
        return Err(Error::Disconnected { components });
    }
    if n == 0 {
        return Ok(PseudoInverse {
            ldag: DMatrix::zeros(0, 0),
        });
    }
    let chol = shifted_factor(&view.laplacian).ok_or(Error::Disconnected { components: 0 })?;
    let shift = T::one() / T::of_usize(n);
    let inv = chol.inverse();
    let mut ldag = &inv + inv.transpose();
    ldag.apply(|x| *x = *x * T::of(0.5) - shift);
    Ok(PseudoInverse { ldag })
}

impl<T: Scalar> PseudoInverse<T> {
    pub fn n(&self) -> usize {
        self.ldag.nrows()
    }

    pub fn resistance(&self) -> ResistanceMatrix<T> {
        ResistanceMatrix::from_gram(&self.ldag)
    }
}

impl<T: Scalar> ResistanceMatrix<T> {
    /// `R = diag(G)1ᵀ + 1diag(G)ᵀ − 2G` for a symmetric Gram-like matrix `G`.
    pub fn from_gram(g: &DMatrix<T>) -> Self {
        let n = g.nrows();
        let two = T::of(2.0);
        let r = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                (g[(i, i)] + g[(j, j)] - two * g[(i, j)]).max(T::zero())
            }
        });
        Self::from_matrix(r)
    }

    pub fn from_matrix(r: DMatrix<T>) -> Self {
        let kirchhoff = r.iter().copied().sum();
        ResistanceMatrix { r, kirchhoff }
    }

    pub fn n(&self) -> usize {
        self.r.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.r[(i, j)]
    }

    /// Row-major CSV of the full matrix.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.n() {
            let row: Vec<String> = (0..self.n()).map(|j| format!("{:e}", self.r[(i, j)])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn resistance_matrix<T: Scalar>(g: &GraphSnapshot<T>) -> Result<ResistanceMatrix<T>> {
    g.require_connected()?;
    Ok(pseudo_inverse(&g.laplacian())?.resistance())
}

/// Single effective resistance `R_ij` by one solve against `L + J/n`.
pub fn effective_resistance<T: Scalar>(g: &GraphSnapshot<T>, i: usize, j: usize) -> Result<T> {
    g.check_vertex(i)?;
    g.check_vertex(j)?;
    g.require_connected()?;
    if i == j {
        return Ok(T::zero());
    }
    let chol = shifted_factor(&g.laplacian_dense()).ok_or(Error::Disconnected { components: 0 })?;
    let mut b = DVector::zeros(g.n());
    b[i] = T::one();
    b[j] = -T::one();
    let x = chol.solve(&b);
    Ok(x[i] - x[j])
}

/// Commute time `κ_ij = 2 · vol(G) · R_ij`, with the volume taken as the
/// total edge weight.
pub fn commute_time<T: Scalar>(g: &GraphSnapshot<T>, i: usize, j: usize) -> Result<T> {
    let r = effective_resistance(g, i, j)?;
    Ok(T::of(2.0) * g.total_weight() * r)
}

/// Effective resistances computed per connected component; `+∞` across
/// components.
pub fn componentwise_resistance<T: Scalar>(g: &GraphSnapshot<T>) -> DMatrix<T> {
    let n = g.n();
    let (count, comp) = g.components();
    let mut r = DMatrix::from_fn(n, n, |i, j| if i == j { T::zero() } else { T::infinity() });
    for c in 0..count {
        let members: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let sub = g.induced(&members);
        let local = pseudo_inverse(&sub.laplacian())
            .expect("induced component is connected")
            .resistance();
        for (a, &u) in members.iter().enumerate() {
            for (b, &v) in members.iter().enumerate() {
                r[(u, v)] = local.r[(a, b)];
            }
        }
    }
    r
}

/// Renormalized resistance; defined for disconnected graphs.
pub fn renormalized_resistance<T: Scalar>(g: &GraphSnapshot<T>) -> RenormalizedResistanceMatrix<T> {
    let rhat = componentwise_resistance(g).map(|r| {
        if r.is_finite_value() {
            r / (T::one() + r)
        } else {
            T::one()
        }
    });
    RenormalizedResistanceMatrix { rhat }
}

impl<T: Scalar> RenormalizedResistanceMatrix<T> {
    pub fn n(&self) -> usize {
        self.rhat.nrows()
    }

    /// Conductance `C_uv = 1/R_uv`, zero across components and on the diagonal.
    pub fn conductance(&self) -> DMatrix<T> {
        self.rhat.map(|h| {
            if h >= T::one() || h <= T::zero() {
                T::zero()
            } else {
                (T::one() - h) / h
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn graph(n: usize, edges: &[(usize, usize)]) -> GraphSnapshot<f64> {
        GraphSnapshot::new(n, edges.iter().map(|&(i, j)| (i, j, 1.0))).unwrap()
    }

    #[test]
    fn single_edge_pinv_matches_spectral_form() {
        // λ₂ = 2 with φ₂ = (1, -1)/√2, so L† = φ₂φ₂ᵀ / 2.
        let p = pseudo_inverse(&graph(2, &[(0, 1)]).laplacian()).unwrap();
        assert_relative_eq!(p.ldag[(0, 0)], 0.25, epsilon = 1e-14);
        assert_relative_eq!(p.ldag[(0, 1)], -0.25, epsilon = 1e-14);
    }

    #[test]
    fn triangle_pinv() {
        let p = pseudo_inverse(&graph(3, &[(0, 1), (1, 2), (0, 2)]).laplacian()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 / 9.0 } else { -1.0 / 9.0 };
                assert_relative_eq!(p.ldag[(i, j)], want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn disconnected_pinv_fails() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert!(matches!(
            pseudo_inverse(&g.laplacian()),
            Err(Error::Disconnected { components: 2 })
        ));
        assert!(resistance_matrix(&g).is_err());
    }

    #[test]
    fn path_cycle_complete_resistances() {
        let p3 = resistance_matrix(&graph(3, &[(0, 1), (1, 2)])).unwrap();
        assert_relative_eq!(p3.get(0, 2), 2.0, epsilon = 1e-12);
        assert_relative_eq!(p3.get(0, 1), 1.0, epsilon = 1e-12);
        assert_relative_eq!(p3.kirchhoff, 8.0, epsilon = 1e-12);

        let k3 = resistance_matrix(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert_relative_eq!(k3.get(1, 2), 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(k3.kirchhoff, 4.0, epsilon = 1e-12);

        let c4 = resistance_matrix(&graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)])).unwrap();
        assert_relative_eq!(c4.get(0, 1), 0.75, epsilon = 1e-12);
        assert_relative_eq!(c4.get(0, 2), 1.0, epsilon = 1e-12);
        assert_relative_eq!(c4.kirchhoff, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn commute_times() {
        let p3 = graph(3, &[(0, 1), (1, 2)]);
        assert_relative_eq!(commute_time(&p3, 0, 2).unwrap(), 8.0, epsilon = 1e-12);
        assert_eq!(commute_time(&p3, 1, 1).unwrap(), 0.0);
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_relative_eq!(commute_time(&k3, 0, 1).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn renormalized_values() {
        let e = renormalized_resistance(&graph(2, &[(0, 1)]));
        assert_relative_eq!(e.rhat[(0, 1)], 0.5, epsilon = 1e-14);
        let iso = renormalized_resistance(&graph(2, &[]));
        assert_eq!(iso.rhat[(0, 1)], 1.0);
        assert_eq!(iso.rhat[(0, 0)], 0.0);
        let k3 = renormalized_resistance(&graph(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_relative_eq!(k3.rhat[(0, 2)], 0.4, epsilon = 1e-12);
        assert_relative_eq!(k3.conductance()[(0, 2)], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn single_precision_path() {
        let g: GraphSnapshot<f32> = GraphSnapshot::new(3, [(0, 1, 1.0f32), (1, 2, 1.0)]).unwrap();
        let r = resistance_matrix(&g).unwrap();
        assert!((r.get(0, 2) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn csv_dump_shape() {
        let r = resistance_matrix(&graph(3, &[(0, 1), (1, 2)])).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 3);
    }
}
