//! Scalar abstraction shared by the LP solver and the diagram store.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar usable as a coefficient type.
///
/// The tolerance hooks let `f32` instantiations run with looser thresholds
/// than `f64` ones; every numeric comparison in the crate goes through them.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static {
    /// Constraint satisfaction / slack threshold.
    fn feas_tol() -> Self;
    /// Pivoting and equality threshold.
    fn opt_tol() -> Self;
    /// Coefficients with smaller magnitude are treated as zero.
    fn zero_tol() -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn feas_tol() -> Self {
        1e-7
    }
    fn opt_tol() -> Self {
        1e-9
    }
    fn zero_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn feas_tol() -> Self {
        1e-4
    }
    fn opt_tol() -> Self {
        1e-5
    }
    fn zero_tol() -> Self {
        1e-6
    }
}

/// Quantize a scalar onto the interning grid (one step per `opt_tol`).
pub(crate) fn quantize<T: Scalar>(v: T) -> i64 {
    let f = v.as_f64();
    if f.is_nan() {
        return i64::MIN + 1;
    }
    if f == f64::INFINITY {
        return i64::MAX;
    }
    if f == f64::NEG_INFINITY {
        return i64::MIN;
    }
    let q = (f / T::opt_tol().as_f64()).round();
    q.clamp(i64::MIN as f64 + 2.0, i64::MAX as f64 - 1.0) as i64
}
