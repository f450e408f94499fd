//! Floating-point abstraction for the simulation core.
//!
//! All of the closed-form math, the plant integrator and the estimator are
//! generic over [`Scalar`] so the same code runs at `f32` or `f64`. The
//! harness and file formats pin `f64`; see the aliases at the crate root.

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};
use rand::distr::{Distribution, StandardUniform};
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar: `f32` or `f64`.
///
/// Sampling is exposed as trait methods so generic code does not need to
/// carry `rand` distribution bounds around.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumCast
    + core::fmt::Debug
    + core::fmt::Display
    + core::iter::Sum
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant. Panics on values unrepresentable in `Self`.
    fn of(v: f64) -> Self {
        <Self as NumCast>::from(v).expect("scalar constant out of range")
    }

    /// Lossy widening to `f64`, for diagnostics and serialization.
    fn to_f64_lossy(self) -> f64 {
        <f64 as NumCast>::from(self).unwrap_or(f64::NAN)
    }

    /// One draw from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from U[0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from U[lo, hi).
    fn range_uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self;
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardUniform.sample(rng)
    }
    fn range_uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardUniform.sample(rng)
    }
    fn range_uniform<R: Rng + ?Sized>(rng: &mut R, lo: Self, hi: Self) -> Self {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    }
}

/// sin(x)/x with the removable singularity filled by its series expansion.
pub(crate) fn sinc<T: Scalar>(x: T) -> T {
    if x.abs() < T::of(1e-4) {
        // 1 - x^2/6; the next term is x^4/120 ~ 1e-18 at the branch point.
        T::one() - x * x / T::of(6.0)
    } else {
        x.sin() / x
    }
}
