//! Eigenmodes of diffusing spins in a linear field gradient, free-induction
//! decay synthesis, multi-Lorentzian spectral fitting and comagnetometer
//! estimators.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below fix the precision.

pub mod bench;
pub mod comag;
pub mod eigen;
pub mod error;
pub mod fid;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::{wrap_angle, Real};

pub type PhysicalConfig64 = model::PhysicalConfig<f64>;
pub type PhysicalConfig32 = model::PhysicalConfig<f32>;
pub type Spectrum64 = eigen::Spectrum<f64>;
pub type Spectrum32 = eigen::Spectrum<f32>;
pub type EigenMode64 = eigen::EigenMode<f64>;
pub type EigenMode32 = eigen::EigenMode<f32>;
pub type FidModel64 = fid::FidModel<f64>;
pub type FidModel32 = fid::FidModel<f32>;
pub type TimeSeries64 = fid::TimeSeries<f64>;
pub type Periodogram64 = spectral::Periodogram<f64>;
pub type FitReport64 = spectral::FitReport<f64>;
pub type CalibrationMatrix64 = comag::CalibrationMatrix<f64>;
pub type BenchmarkStats64 = bench::BenchmarkStats<f64>;
