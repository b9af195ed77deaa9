//! Scalar abstraction shared by every geometric routine.
//!
//! All oracles and estimators are written against [`Real`], so the same code
//! runs in `f64` (the default, and the precision every tolerance in the test
//! suite is calibrated for) or in `f32` for cheap exploratory runs.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar usable by the geometry and Monte-Carlo code.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Serialize + DeserializeOwned + Send + Sync + 'static
{
    /// Converts an `f64` literal or intermediate into `Self`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }

    fn infinity() -> Self {
        Self::of(f64::INFINITY)
    }

    /// Relative tolerance for "unit vector" and "orthonormal" checks.
    ///
    /// `1e-12` in double precision, relaxed proportionally to machine epsilon
    /// for narrower types.
    fn unit_tolerance() -> Self {
        Self::of(1e-12).max(Self::default_epsilon() * Self::of(64.0))
    }
}

impl Real for f64 {}
impl Real for f32 {}
