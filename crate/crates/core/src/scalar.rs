use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the solvers are generic over.
///
/// The two tolerances are per-type because the defaults that make sense for
/// `f64` (weight sums within `1e-9`, power iteration to `1e-12`) are below
/// `f32` resolution.
pub trait Real:
    Float
    + FromPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Equality slack for sums, normalisation and reciprocity checks.
    fn tolerance() -> Self;

    /// Stopping threshold for iterative eigenvector computation.
    fn convergence_tolerance() -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    /// `a <= b` up to `tolerance()` scaled by magnitude.
    fn le_tol(a: Self, b: Self) -> bool {
        a <= b + Self::tolerance() * Self::one().max(a.abs()).max(b.abs())
    }

    fn approx_eq(a: Self, b: Self) -> bool {
        (a - b).abs() <= Self::tolerance() * Self::one().max(a.abs()).max(b.abs())
    }
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn convergence_tolerance() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn convergence_tolerance() -> Self {
        1e-6
    }
}

/// `H(d) = 1 + 1/2 + ... + 1/d`, zero for `d = 0`.
pub fn harmonic<T: Real>(d: usize) -> T {
    (1..=d).map(|i| T::one() / T::from_count(i)).fold(T::zero(), |a, b| a + b)
}
