//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Dense and iterative linear algebra runs over [`Scalar`] (`f32` or `f64`).
//! The closed-form oracles only need field arithmetic, so they run over the
//! weaker [`ClosedFormScalar`], which is also implemented for exact rationals.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use nalgebra::RealField;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Floating-point type usable by the resistance, spectral and sketch code.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// Positive infinity, used as the sentinel for disconnecting perturbations.
    fn infinity() -> Self;

    fn is_finite_value(self) -> bool;

    /// Machine epsilon of the type.
    fn machine_eps() -> Self;

    /// Converts an `f64` constant. Panics only on NaN-producing conversions,
    /// which cannot happen for f32/f64.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// A tolerance stated for f64 work, floored to something the type can
    /// actually resolve (64 ulps at unit scale).
    #[inline]
    fn tol(x: f64) -> Self {
        let floor = Self::machine_eps() * Self::of(64.0);
        let t = Self::of(x);
        if t > floor {
            t
        } else {
            floor
        }
    }
}

impl Scalar for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    fn machine_eps() -> Self {
        f64::EPSILON
    }
}

impl Scalar for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    fn machine_eps() -> Self {
        f32::EPSILON
    }
}

/// Field arithmetic needed to evaluate the canonical-family closed forms.
///
/// Implemented for `f32`, `f64` and `Ratio<i64>` / `Ratio<i128>`, so the same
/// formula can be evaluated exactly or in floating point.
pub trait ClosedFormScalar:
    Clone + Num + Signed + PartialOrd + Debug + Display
{
    fn from_int(v: i64) -> Self;

    /// Best-effort conversion for reporting.
    fn approx_f64(&self) -> f64;
}

impl ClosedFormScalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn approx_f64(&self) -> f64 {
        *self
    }
}

impl ClosedFormScalar for f32 {
    fn from_int(v: i64) -> Self {
        v as f32
    }
    fn approx_f64(&self) -> f64 {
        *self as f64
    }
}

impl ClosedFormScalar for Ratio<i64> {
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(v)
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl ClosedFormScalar for Ratio<i128> {
    fn from_int(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
