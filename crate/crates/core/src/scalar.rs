//! Scalar abstraction shared by every solver.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the numerical core is generic over (`f32` or `f64`).
///
/// Besides the usual arithmetic it carries the per-precision tolerances the
/// root finders and the least-squares fitter converge to.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Relative boundary-mismatch tolerance for shooting roots.
    const ROOT_TOL: f64;
    /// Relative step for central-difference derivatives.
    const DIFF_STEP: f64;
    /// Relative tolerance used when two quantities are compared for equality.
    const CMP_TOL: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const ROOT_TOL: f64 = 1e-10;
    const DIFF_STEP: f64 = 1e-7;
    const CMP_TOL: f64 = 1e-9;
}

impl Real for f32 {
    const ROOT_TOL: f64 = 2e-4;
    const DIFF_STEP: f64 = 3e-3;
    const CMP_TOL: f64 = 1e-3;
}

/// Shorthand for [`Real::lit`].
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::lit(x)
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = x % two_pi;
    if y <= -T::PI() {
        y += two_pi;
    } else if y > T::PI() {
        y -= two_pi;
    }
    y
}
