//! Canonical graph families and their closed-form resistance quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphSnapshot;
use crate::scalar::{ClosedFormScalar, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    Complete,
    Star,
    Path,
    Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalFamily {
    pub kind: FamilyKind,
    pub n: usize,
}

impl CanonicalFamily {
    pub fn new(kind: FamilyKind, n: usize) -> Result<Self> {
        let min = if kind == FamilyKind::Cycle { 3 } else { 2 };
        if n < min {
            return Err(Error::param(format!("{kind:?} needs n >= {min}, got {n}")));
        }
        Ok(CanonicalFamily { kind, n })
    }
}

/// Unit-weight member of the family. The star hub is vertex 0; paths and
/// cycles follow index order.
pub fn build_canonical<T: Scalar>(f: CanonicalFamily) -> GraphSnapshot<T> {
    let n = f.n;
    let one = T::one();
    let edges: Vec<(usize, usize, T)> = match f.kind {
        FamilyKind::Complete => (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, one))).collect(),
        FamilyKind::Star => (1..n).map(|i| (0, i, one)).collect(),
        FamilyKind::Path => (0..n - 1).map(|i| (i, i + 1, one)).collect(),
        FamilyKind::Cycle => (0..n).map(|i| (i, (i + 1) % n, one)).collect(),
    };
    GraphSnapshot::new(n, edges).expect("canonical family is a valid graph")
}

fn int<C: ClosedFormScalar>(v: usize) -> C {
    C::from_int(v as i64)
}

/// Closed-form RP-1 distance between a unit-weight family member and the
/// same graph with `dw` added on pair `(i0, j0)`.
///
/// Supported patterns: any pair of `K_n`; hub-leaf or leaf-leaf of `S_n`;
/// any pair of `P_n` or `C_n`.
pub fn closed_form_rp1<C: ClosedFormScalar>(f: CanonicalFamily, i0: usize, j0: usize, dw: C) -> Result<C> {
    let n = f.n;
    if i0 == j0 || i0 >= n || j0 >= n {
        return Err(Error::param(format!("invalid pair ({i0}, {j0}) for n = {n}")));
    }
    let (a, b) = (i0.min(j0), i0.max(j0));
    let one = C::one();
    let two = int::<C>(2);
    let nn = int::<C>(n);
    let neg_one = -one.clone();
    let existing = match f.kind {
        FamilyKind::Complete => true,
        FamilyKind::Star => a == 0,
        FamilyKind::Path => b == a + 1,
        FamilyKind::Cycle => b == a + 1 || (a == 0 && b == n - 1),
    };
    if existing {
        if dw < neg_one {
            return Err(Error::param("perturbation makes an edge weight negative"));
        }
        let bridge = matches!(f.kind, FamilyKind::Star | FamilyKind::Path) || (f.kind == FamilyKind::Complete && n == 2);
        if bridge && dw == neg_one {
            return Err(Error::param("removing a bridge disconnects the graph; the distance is infinite"));
        }
    } else if dw <= C::zero() {
        return Err(Error::param("a new edge needs a positive weight"));
    }
    let value = match f.kind {
        FamilyKind::Complete => int::<C>(4) * dw.abs() / (nn + two * dw),
        FamilyKind::Star if a == 0 => two * (nn.clone() - one.clone()) * dw.abs() / (one + dw),
        FamilyKind::Star => int::<C>(4) * nn * dw.clone() / (one + two * dw),
        FamilyKind::Path => {
            // 1-based endpoints i < j and chord length k = j − i.
            let (i, j) = (int::<C>(a + 1), int::<C>(b + 1));
            let k = int::<C>(b - a);
            let three = int::<C>(3);
            let s = i.clone() + j.clone() - one.clone();
            let inner = one.clone() + k.clone() * (two.clone() * j + int::<C>(4) * i - three.clone());
            let num = dw.clone() * k.clone() * (two * nn * inner - three * k.clone() * s.clone() * s);
            num / (int::<C>(6) * (dw * k + one))
        }
        FamilyKind::Cycle => {
            let k = int::<C>((a + n - b) % n);
            let kk = k.clone() * k.clone();
            let num = dw.clone()
                * k.clone()
                * nn.clone()
                * (kk.clone() * k.clone() - two * nn.clone() * (kk - one) + k.clone() * (nn.clone() * nn.clone() - int::<C>(2)));
            num / (int::<C>(6) * (nn.clone() + dw * k.clone() * (nn - k)))
        }
    };
    Ok(value.abs())
}

/// Kirchhoff index (ordered pairs) of the unit-weight family member.
pub fn closed_form_kirchhoff<C: ClosedFormScalar>(f: CanonicalFamily) -> C {
    let n = int::<C>(f.n);
    let n1 = int::<C>(f.n - 1);
    let one = C::one();
    match f.kind {
        FamilyKind::Complete => int::<C>(2) * n1,
        FamilyKind::Star => int::<C>(2) * n1.clone() * n1,
        FamilyKind::Path => n1 * n.clone() * (n + one) / int::<C>(3),
        FamilyKind::Cycle => n1 * n.clone() * (n + one) / int::<C>(6),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticKind {
    /// Any edge of `K_n` changed by `dw`.
    Complete,
    /// A leaf-leaf edge of weight `dw` added to `S_n`.
    Star,
}

/// Leading-order rooted DeltaCon distance for a single-edge change:
/// `|1/√2 − 1/√(2+Δw)| n` on `K_n`, `√(2Δw/n) − √2/n` on `S_n`.
pub fn deltacon_asymptotic(kind: AsymptoticKind, n: usize, dw: f64) -> f64 {
    if dw == 0.0 {
        return 0.0;
    }
    let n = n as f64;
    match kind {
        AsymptoticKind::Complete => (1.0 / 2f64.sqrt() - 1.0 / (2.0 + dw).sqrt()).abs() * n,
        AsymptoticKind::Star => (2.0 * dw).sqrt() / n.sqrt() - 2f64.sqrt() / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::resistance_matrix;
    use crate::rp::{rp_distance, RpOrder};
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    fn fam(kind: FamilyKind, n: usize) -> CanonicalFamily {
        CanonicalFamily::new(kind, n).unwrap()
    }

    fn exact(f: CanonicalFamily, i: usize, j: usize, dw: f64) -> f64 {
        let g: GraphSnapshot<f64> = build_canonical(f);
        rp_distance(&g, &g.with_weight_delta(i, j, dw).unwrap(), RpOrder::ONE).unwrap()
    }

    #[test]
    fn builders() {
        let k4: GraphSnapshot<f64> = build_canonical(fam(FamilyKind::Complete, 4));
        assert_eq!(k4.m(), 6);
        let s5: GraphSnapshot<f64> = build_canonical(fam(FamilyKind::Star, 5));
        assert_eq!(s5.m(), 4);
        assert_eq!(s5.degree(0), 4.0);
        let c3: GraphSnapshot<f64> = build_canonical(fam(FamilyKind::Cycle, 3));
        let k3: GraphSnapshot<f64> = build_canonical(fam(FamilyKind::Complete, 3));
        assert_eq!(c3, k3);
        assert!(CanonicalFamily::new(FamilyKind::Cycle, 2).is_err());
    }

    #[test]
    fn stated_values() {
        let v: Q = closed_form_rp1(fam(FamilyKind::Complete, 10), 0, 1, Q::from_int(2)).unwrap();
        assert_eq!(v, Q::new(4, 7));
        let v: Q = closed_form_rp1(fam(FamilyKind::Star, 6), 0, 3, Q::from_int(1)).unwrap();
        assert_eq!(v, Q::from_int(5));
    }

    #[test]
    fn cycle_diameter_chord_matches_exact() {
        let f = fam(FamilyKind::Cycle, 8);
        let v: Q = closed_form_rp1(f, 0, 4, Q::from_int(1)).unwrap();
        assert_eq!(v, Q::from_int(16));
        assert!((exact(f, 0, 4, 1.0) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn every_pattern_matches_exact() {
        let cases = [
            (FamilyKind::Complete, 7, 2, 5, 0.7),
            (FamilyKind::Complete, 6, 0, 1, -1.0),
            (FamilyKind::Star, 9, 0, 4, 2.5),
            (FamilyKind::Star, 9, 0, 4, -0.5),
            (FamilyKind::Star, 9, 3, 7, 1.5),
            (FamilyKind::Path, 11, 2, 9, 0.8),
            (FamilyKind::Path, 11, 4, 5, 3.0),
            (FamilyKind::Path, 6, 0, 5, 1.0),
            (FamilyKind::Cycle, 10, 7, 2, 1.3),
            (FamilyKind::Cycle, 10, 3, 4, -0.5),
            (FamilyKind::Cycle, 9, 0, 8, 2.0),
        ];
        for (kind, n, i, j, dw) in cases {
            let f = fam(kind, n);
            let cf: f64 = closed_form_rp1(f, i, j, dw).unwrap();
            let ex = exact(f, i, j, dw);
            assert!((cf - ex).abs() <= 1e-9 * ex, "{kind:?} n={n} ({i},{j}) dw={dw}: {cf} vs {ex}");
        }
    }

    #[test]
    fn illegal_patterns() {
        assert!(closed_form_rp1::<f64>(fam(FamilyKind::Star, 5), 1, 2, -1.0).is_err());
        assert!(closed_form_rp1::<f64>(fam(FamilyKind::Path, 5), 1, 2, -1.0).is_err());
        assert!(closed_form_rp1::<f64>(fam(FamilyKind::Path, 5), 1, 3, -0.5).is_err());
        assert!(closed_form_rp1::<f64>(fam(FamilyKind::Complete, 5), 1, 1, 1.0).is_err());
    }

    #[test]
    fn kirchhoff_small_cases() {
        assert_eq!(closed_form_kirchhoff::<Q>(fam(FamilyKind::Path, 3)), Q::from_int(8));
        assert_eq!(closed_form_kirchhoff::<Q>(fam(FamilyKind::Star, 3)), Q::from_int(8));
        assert_eq!(closed_form_kirchhoff::<Q>(fam(FamilyKind::Complete, 3)), Q::from_int(4));
        for kind in [FamilyKind::Complete, FamilyKind::Star, FamilyKind::Path, FamilyKind::Cycle] {
            for n in [5, 10, 25] {
                let f = fam(kind, n);
                let r = resistance_matrix(&build_canonical::<f64>(f)).unwrap();
                let cf: f64 = closed_form_kirchhoff(f);
                assert!((r.kirchhoff - cf).abs() <= 1e-9 * cf);
            }
        }
    }

    #[test]
    fn deltacon_prediction_zero_change() {
        assert_eq!(deltacon_asymptotic(AsymptoticKind::Complete, 100, 0.0), 0.0);
        assert_eq!(deltacon_asymptotic(AsymptoticKind::Star, 100, 0.0), 0.0);
        let c = deltacon_asymptotic(AsymptoticKind::Complete, 500, 1.0);
        assert!((c - (0.5f64.sqrt() - (1.0f64 / 3.0).sqrt()) * 500.0).abs() < 1e-12);
    }
}
