//! Physical parameters, unit conventions and the dimensionless reduction.
//!
//! Units: lengths in cm, fields in nT, gradients in nT/cm, rates and angular
//! frequencies in s⁻¹ / rad·s⁻¹, gyromagnetic ratios in rad·s⁻¹·nT⁻¹.
//! Signed quantities (γ, G, B₀) keep their sign everywhere.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// γ/(2π) of ¹²⁹Xe in Hz/nT.
pub const GAMMA_129_HZ_PER_NT: f64 = -11.777e-3;

/// Ratio γ₁₂₉/γ₁₃₁.
pub const GYRO_RATIO_129_131: f64 = -3.373417;

/// |γ₁₂₉ B₀|/(2π) used for the gradient sweeps, Hz.
pub const LARMOR_129_HZ: f64 = 257.45;

/// Main-text cell and gas parameters.
pub const CELL_LENGTH_CM: f64 = 0.8;
pub const DIFFUSION_CM2_S: f64 = 0.211;
pub const GAMMA_2C_PER_S: f64 = 0.306;

pub fn gamma_129<T: Real>() -> T {
    lit::<T>(GAMMA_129_HZ_PER_NT) * T::TAU()
}

pub fn gamma_131<T: Real>() -> T {
    gamma_129::<T>() / lit(GYRO_RATIO_129_131)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig<T> {
    /// Gyromagnetic ratio, rad·s⁻¹·nT⁻¹ (signed).
    pub gamma: T,
    /// Diffusion constant D, cm²/s.
    pub diffusion: T,
    /// Inner cell side length L, cm.
    pub cell_length: T,
    /// Linear gradient G along z, nT/cm (signed).
    pub gradient: T,
    /// Bias field B₀, nT.
    pub bias_field: T,
    /// Collisional transverse relaxation Γ₂c, s⁻¹.
    pub gamma_collision: T,
    /// Dimensionless Robin wall parameter λ.
    #[serde(default)]
    pub wall_lambda: T,
}

impl<T: Real> PhysicalConfig<T> {
    /// ¹²⁹Xe in the main-text cell at zero gradient, with |γB₀|/(2π) = 257.45 Hz.
    pub fn xe129() -> Self {
        let gamma = gamma_129::<T>();
        Self {
            gamma,
            diffusion: lit(DIFFUSION_CM2_S),
            cell_length: lit(CELL_LENGTH_CM),
            gradient: T::zero(),
            bias_field: lit::<T>(LARMOR_129_HZ) * T::TAU() / gamma.abs(),
            gamma_collision: lit(GAMMA_2C_PER_S),
            wall_lambda: T::zero(),
        }
    }

    /// ¹³¹Xe sharing the ¹²⁹Xe cell and bias field, γ₁₃₁ = γ₁₂₉/R.
    pub fn xe131() -> Self {
        Self {
            gamma: gamma_131::<T>(),
            ..Self::xe129()
        }
    }

    pub fn with_gradient(self, gradient: T) -> Self {
        Self { gradient, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.gamma,
            self.diffusion,
            self.cell_length,
            self.gradient,
            self.bias_field,
            self.gamma_collision,
            self.wall_lambda,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("physical config"));
        }
        if self.gamma == T::zero() {
            return Err(Error::InvalidInput("gamma must be non-zero".into()));
        }
        if self.diffusion <= T::zero() {
            return Err(Error::InvalidInput("diffusion must be positive".into()));
        }
        if self.cell_length <= T::zero() {
            return Err(Error::InvalidInput("cell_length must be positive".into()));
        }
        if self.gamma_collision < T::zero() {
            return Err(Error::InvalidInput("gamma_collision must be >= 0".into()));
        }
        if self.wall_lambda < T::zero() {
            return Err(Error::InvalidInput("wall_lambda must be >= 0".into()));
        }
        Ok(())
    }

    /// g′ = γGL³/(8D).
    pub fn g_prime(&self) -> T {
        self.gamma * self.gradient * self.cell_length.powi(3) / (lit::<T>(8.0) * self.diffusion)
    }

    /// Gradient (nT/cm) at which this configuration reaches the given g′.
    pub fn gradient_for_g_prime(&self, g_prime: T) -> T {
        g_prime * lit::<T>(8.0) * self.diffusion / (self.gamma * self.cell_length.powi(3))
    }

    /// 4D/L², converts dimensionless eigenvalues to s⁻¹.
    pub fn eigen_scale(&self) -> T {
        lit::<T>(4.0) * self.diffusion / (self.cell_length * self.cell_length)
    }

    /// Larmor angular frequency γB₀ (signed).
    pub fn larmor(&self) -> T {
        self.gamma * self.bias_field
    }
}

/// The eigenproblem rescaled to ζ = 2z/L ∈ [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessProblem<T> {
    pub g_prime: T,
    /// 4D/L², s⁻¹.
    pub eigen_scale: T,
    /// Γ₂c + iγB₀, s⁻¹.
    pub constant_shift: Complex<T>,
}

/// A dimensionless eigenvalue together with its physical decay rate and
/// angular frequency, s_k = Γ_k + iω_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEigenvalue<T> {
    pub q: Complex<T>,
    pub decay: T,
    pub frequency: T,
}

impl<T: Real> ComplexEigenvalue<T> {
    pub fn s(&self) -> Complex<T> {
        Complex::new(self.decay, self.frequency)
    }
}

pub fn to_dimensionless<T: Real>(config: &PhysicalConfig<T>) -> Result<DimensionlessProblem<T>> {
    config.validate()?;
    let problem = DimensionlessProblem {
        g_prime: config.g_prime(),
        eigen_scale: config.eigen_scale(),
        constant_shift: Complex::new(config.gamma_collision, config.larmor()),
    };
    if !problem.g_prime.is_finite() || !problem.eigen_scale.is_finite() {
        return Err(Error::NonFinite("dimensionless reduction"));
    }
    Ok(problem)
}

pub fn physical_eigenvalue<T: Real>(problem: &DimensionlessProblem<T>, q: Complex<T>) -> ComplexEigenvalue<T> {
    let s = problem.constant_shift + q * problem.eigen_scale;
    ComplexEigenvalue {
        q,
        decay: s.re,
        frequency: s.im,
    }
}
