//! RP-p distances and the inverse map from resistances to the Laplacian.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{GraphSnapshot, LaplacianView};
use crate::resistance::{renormalized_resistance, resistance_matrix, ResistanceMatrix};
use crate::scalar::Scalar;

/// Order of the entrywise norm: finite `p ≥ 1` or `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RpOrder {
    Finite(f64),
    Infinity,
}

impl RpOrder {
    pub const ONE: RpOrder = RpOrder::Finite(1.0);
    pub const TWO: RpOrder = RpOrder::Finite(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(RpOrder::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(RpOrder::Finite(p))
        } else {
            Err(Error::param(format!("norm order must lie in [1, inf], got {p}")))
        }
    }
}

impl fmt::Display for RpOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RpOrder::Finite(p) => write!(f, "{p}"),
            RpOrder::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for RpOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(RpOrder::Infinity),
            other => other
                .parse::<f64>()
                .map_err(|e| Error::param(format!("bad norm order '{s}': {e}")))
                .and_then(RpOrder::new),
        }
    }
}

/// Entrywise p-norm of `a − b`, scaled by the largest entry to avoid overflow.
pub fn entrywise_distance<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, p: RpOrder) -> T {
    let diffs: Vec<T> = a.iter().zip(b.iter()).map(|(&x, &y)| (x - y).abs()).collect();
    let max = diffs.iter().copied().fold(T::zero(), |m, d| m.max(d));
    match p {
        RpOrder::Infinity => max,
        _ if max == T::zero() => T::zero(),
        RpOrder::Finite(p) if p == 1.0 => diffs.into_iter().sum(),
        RpOrder::Finite(p) => {
            let pt = T::of(p);
            let s: T = diffs.into_iter().map(|d| (d / max).powf(pt)).sum();
            max * s.powf(T::one() / pt)
        }
    }
}

fn same_size<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>) -> Result<()> {
    if g1.n() == g2.n() {
        Ok(())
    } else {
        Err(Error::SizeMismatch {
            left: g1.n(),
            right: g2.n(),
        })
    }
}

/// `‖R⁽¹⁾ − R⁽²⁾‖_p` over ordered pairs. Both graphs must be connected.
pub fn rp_distance<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>, p: RpOrder) -> Result<T> {
    same_size(g1, g2)?;
    let r1 = resistance_matrix(g1)?;
    let r2 = resistance_matrix(g2)?;
    Ok(entrywise_distance(&r1.r, &r2.r, p))
}

/// Distance between renormalized resistances. Graphs of different sizes are
/// compared on the union of their vertex sets; missing vertices are isolated.
pub fn rp_distance_renormalized<T: Scalar>(
    g1: &GraphSnapshot<T>,
    g2: &GraphSnapshot<T>,
    p: RpOrder,
) -> T {
    let n = g1.n().max(g2.n());
    let pad = |g: &GraphSnapshot<T>| g.with_isolated(n - g.n());
    let h1 = renormalized_resistance(&pad(g1));
    let h2 = renormalized_resistance(&pad(g2));
    entrywise_distance(&h1.rhat, &h2.rhat, p)
}

/// `|Kf(G⁽¹⁾) − Kf(G⁽²⁾)|`; equals RP-1 when all weight changes share a sign.
pub fn kirchhoff_difference<T: Scalar>(g1: &GraphSnapshot<T>, g2: &GraphSnapshot<T>) -> Result<T> {
    same_size(g1, g2)?;
    let k1 = resistance_matrix(g1)?.kirchhoff;
    let k2 = resistance_matrix(g2)?.kirchhoff;
    Ok((k1 - k2).abs())
}

/// Recovers the Laplacian from a resistance matrix.
///
/// `L† = −½ (R − (RJ + JR)/n + JRJ/n²)` and `L = (L† + J/n)⁻¹ − J/n`.
/// Off-diagonal entries of `L` above `1e-8 · max|L|` mean `R` is not the
/// resistance matrix of any graph.
pub fn laplacian_from_resistance<T: Scalar>(r: &ResistanceMatrix<T>) -> Result<LaplacianView<T>> {
    let n = r.n();
    let m = &r.r;
    if n == 0 {
        return Err(Error::NotRealizable("empty matrix".into()));
    }
    let scale_r = m.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let sym_tol = T::tol(1e-10) * scale_r.max(T::one());
    for i in 0..n {
        if m[(i, i)].abs() > sym_tol {
            return Err(Error::NotRealizable(format!("nonzero diagonal at {i}")));
        }
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > sym_tol {
                return Err(Error::NotRealizable(format!("asymmetric at ({i}, {j})")));
            }
            if !(m[(i, j)] > T::zero()) {
                return Err(Error::NotRealizable(format!(
                    "non-positive resistance at ({i}, {j})"
                )));
            }
        }
    }
    let nt = T::of_usize(n);
    let row_means: Vec<T> = (0..n).map(|i| m.row(i).sum() / nt).collect();
    let col_means: Vec<T> = (0..n).map(|j| m.column(j).sum() / nt).collect();
    let grand = row_means.iter().copied().sum::<T>() / nt;
    let half = T::of(0.5);
    let shift = T::one() / nt;
    let shifted = DMatrix::from_fn(n, n, |i, j| {
        -half * (m[(i, j)] - row_means[i] - col_means[j] + grand) + shift
    });
    let inv = shifted
        .cholesky()
        .ok_or_else(|| Error::NotRealizable("L† + J/n is not positive definite".into()))?
        .inverse();
    let lap = DMatrix::from_fn(n, n, |i, j| half * (inv[(i, j)] + inv[(j, i)]) - shift);
    let scale_l = lap.iter().fold(T::zero(), |a, &x| a.max(x.abs()));
    let tol = T::tol(1e-8) * scale_l;
    let mut triples = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let off = lap[(i, j)];
            if off > tol {
                return Err(Error::NotRealizable(format!(
                    "recovered Laplacian has positive off-diagonal {off:e} at ({i}, {j})"
                )));
            }
            if -off > tol {
                triples.push((i, j, -off));
            }
        }
    }
    let g = GraphSnapshot::new(n, triples)?;
    Ok(g.laplacian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn complete(n: usize) -> GraphSnapshot<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                t.push((i, j, 1.0));
            }
        }
        GraphSnapshot::new(n, t).unwrap()
    }

    fn unit(n: usize, edges: &[(usize, usize)]) -> GraphSnapshot<f64> {
        GraphSnapshot::new(n, edges.iter().map(|&(i, j)| (i, j, 1.0))).unwrap()
    }

    #[test]
    fn order_parsing() {
        assert_eq!("inf".parse::<RpOrder>().unwrap(), RpOrder::Infinity);
        assert_eq!("2".parse::<RpOrder>().unwrap(), RpOrder::TWO);
        assert!("0.5".parse::<RpOrder>().is_err());
        assert!(RpOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn identical_graphs_are_zero() {
        let k5 = complete(5);
        assert_eq!(rp_distance(&k5, &k5, RpOrder::ONE).unwrap(), 0.0);
    }

    #[test]
    fn complete_graph_edge_bump() {
        let k4 = complete(4);
        let bumped = k4.with_weight_delta(0, 1, 1.0).unwrap();
        let d = rp_distance(&k4, &bumped, RpOrder::ONE).unwrap();
        assert_relative_eq!(d, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn star_hub_leaf_bump() {
        let s3 = unit(3, &[(0, 1), (0, 2)]);
        let bumped = s3.with_weight_delta(0, 1, 1.0).unwrap();
        assert_relative_eq!(rp_distance(&s3, &bumped, RpOrder::ONE).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rp_rejects_bad_inputs() {
        let a = unit(3, &[(0, 1), (1, 2)]);
        let b = unit(4, &[(0, 1), (1, 2), (2, 3)]);
        assert!(matches!(rp_distance(&a, &b, RpOrder::ONE), Err(Error::SizeMismatch { .. })));
        let c = unit(3, &[(0, 1)]);
        assert!(matches!(rp_distance(&a, &c, RpOrder::ONE), Err(Error::Disconnected { .. })));
    }

    #[test]
    fn renormalized_examples() {
        let g = unit(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let padded = g.with_isolated(3);
        assert_eq!(rp_distance_renormalized(&g, &padded, RpOrder::ONE), 0.0);

        let edge = unit(2, &[(0, 1)]);
        let empty = unit(2, &[]);
        assert_relative_eq!(rp_distance_renormalized(&edge, &empty, RpOrder::ONE), 1.0, epsilon = 1e-14);

        let split = unit(4, &[(0, 1), (2, 3)]);
        assert_eq!(rp_distance_renormalized(&split, &split, RpOrder::TWO), 0.0);
    }

    #[test]
    fn inverse_map_round_trips() {
        for g in [unit(3, &[(0, 1), (1, 2)]), complete(3)] {
            let l = laplacian_from_resistance(&resistance_matrix(&g).unwrap()).unwrap();
            assert!((l.laplacian - g.laplacian_dense()).abs().max() < 1e-10);
        }
    }

    #[test]
    fn zero_matrix_is_not_realizable() {
        let r = ResistanceMatrix::from_matrix(DMatrix::<f64>::zeros(3, 3));
        assert!(matches!(laplacian_from_resistance(&r), Err(Error::NotRealizable(_))));
    }

    #[test]
    fn non_metric_matrix_is_not_realizable() {
        // R_02 far exceeds R_01 + R_12, which forces a positive off-diagonal in L.
        let r = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 10.0, 1.0, 0.0, 1.0, 10.0, 1.0, 0.0]);
        assert!(laplacian_from_resistance(&ResistanceMatrix::from_matrix(r)).is_err());
    }

    #[test]
    fn kirchhoff_difference_cases() {
        let k4 = complete(4);
        let minus = k4.with_weight_delta(0, 1, -1.0).unwrap();
        let kd = kirchhoff_difference(&k4, &minus).unwrap();
        let d1 = rp_distance(&k4, &minus, RpOrder::ONE).unwrap();
        assert_relative_eq!(kd, d1, epsilon = 1e-10);
        assert_eq!(kirchhoff_difference(&k4, &k4).unwrap(), 0.0);

        let c4 = unit(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]);
        let mixed = c4
            .with_weight_delta(0, 1, 0.5)
            .unwrap()
            .with_weight_delta(2, 3, -0.5)
            .unwrap();
        let kd = kirchhoff_difference(&c4, &mixed).unwrap();
        let d1 = rp_distance(&c4, &mixed, RpOrder::ONE).unwrap();
        assert!(kd < d1 - 1e-6, "{kd} vs {d1}");
    }
}
