//! Scalar abstraction shared by the sampled-data code paths.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftNum;

/// Real floating point type usable for paths, fields and estimators.
///
/// Implemented for `f32` and `f64`. Quadrature-based code (`spectral`,
/// `theory`) always runs in `f64`.
pub trait Real: Float + FloatConst + FromPrimitive + NumAssign + FftNum + Sum + Debug + Display + Default {
    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real values convert to f64")
    }

    /// One standard normal draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Real for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}
