//! Reduction to the uniform mode and the first odd mode.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysicalConfig;
use crate::scalar::{lit, Real};

/// g = (32√2/π⁴)·g′.
pub fn coupling_from_g_prime<T: Real>(g_prime: T) -> T {
    lit::<T>(32.0 * 2f64.sqrt()) / T::PI().powi(4) * g_prime
}

/// g′ at which the reduced model has its exceptional point, π⁴/(32√2).
pub fn two_mode_ep<T: Real>() -> T {
    T::PI().powi(4) / lit(32.0 * 2f64.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeSystem<T> {
    /// ε = Dπ²/(2L²), s⁻¹.
    pub epsilon: T,
    pub g: T,
    pub xi_plus: Complex<T>,
    pub xi_minus: Complex<T>,
}

pub fn two_mode<T: Real>(config: &PhysicalConfig<T>) -> Result<TwoModeSystem<T>> {
    config.validate()?;
    let epsilon = config.diffusion * T::PI() * T::PI() / (lit::<T>(2.0) * config.cell_length.powi(2));
    Ok(TwoModeSystem::new(epsilon, coupling_from_g_prime(config.g_prime())))
}

impl<T: Real> TwoModeSystem<T> {
    pub fn new(epsilon: T, g: T) -> Self {
        let root = Complex::new(T::one() - g * g, T::zero()).sqrt();
        let xi_plus = root * epsilon;
        Self {
            epsilon,
            g,
            xi_plus,
            xi_minus: -xi_plus,
        }
    }

    pub fn is_broken(&self) -> bool {
        self.g.abs() > T::one()
    }

    /// (sin φ, cos φ) of the eigenvectors ν± = (1, ±e^{∓iφ})/√2 of
    /// ε[[−1, ig], [ig, 1]]: sin φ = 1/g, cos φ = √(g²−1)/g.
    pub fn mixing(&self) -> Result<(T, T)> {
        if !self.is_broken() {
            return Err(Error::InvalidPhase(self.g.as_f64()));
        }
        let g = self.g;
        Ok((T::one() / g, (g * g - T::one()).sqrt() / g))
    }

    /// Mixing angle φ (broken phase only).
    pub fn phi(&self) -> Result<T> {
        let (s, c) = self.mixing()?;
        Ok(s.atan2(c))
    }

    /// Splitting Im ξ₊ − Im ξ₋ = 2ε√(g²−1), zero in the symmetric phase.
    pub fn splitting(&self) -> T {
        (self.xi_plus - self.xi_minus).im
    }
}
