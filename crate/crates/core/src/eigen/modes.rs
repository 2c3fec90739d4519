//! Sampled eigenmodes and PT-symmetry diagnostics.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::shooting::Shooter;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub const DEFAULT_GRID: usize = 801;

/// M_k(ζ) on a uniform grid over [−1, 1], scaled to max |M| = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMode<T> {
    pub grid: Vec<T>,
    pub values: Vec<Complex<T>>,
    pub index: usize,
    pub q: Complex<T>,
    /// |M′(+1)| / max|M| of the underlying trajectory.
    pub boundary_residual: T,
}

/// Samples the shooting trajectory of eigenvalue `q` on `n_grid` points.
pub fn eigenmode<T: Real>(g_prime: T, q: Complex<T>, n_grid: usize, index: usize) -> Result<EigenMode<T>> {
    if n_grid < 3 {
        return Err(Error::InvalidInput("eigenmode grid needs at least 3 points".into()));
    }
    let intervals = n_grid - 1;
    let per = Shooter::default().steps.div_ceil(intervals);
    let sh = Shooter { steps: per * intervals };
    let mut values = Vec::with_capacity(n_grid);
    let shot = sh.integrate(g_prime, q, |i, m, _| {
        if i % per == 0 {
            values.push(m);
        }
    })?;
    let peak = values.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    if !(peak > T::zero()) {
        return Err(Error::NumericFailure("eigenmode vanished".into()));
    }
    for v in values.iter_mut() {
        *v = *v / peak;
    }
    let step = lit::<T>(2.0) / lit::<T>(intervals as f64);
    let grid = (0..n_grid)
        .map(|i| -T::one() + step * lit::<T>(i as f64))
        .collect();
    Ok(EigenMode {
        grid,
        values,
        index,
        q,
        boundary_residual: shot.derivative.norm() / shot.scale,
    })
}

impl<T: Real> EigenMode<T> {
    fn weights(&self) -> Vec<T> {
        trapezoid_weights(self.grid.len(), self.grid[1] - self.grid[0])
    }

    /// Linear interpolation of M at ζ ∈ [−1, 1].
    pub fn at(&self, zeta: T) -> Complex<T> {
        let n = self.grid.len();
        let h = self.grid[1] - self.grid[0];
        let x = ((zeta - self.grid[0]) / h).max(T::zero()).min(lit((n - 1) as f64));
        let i = x.floor().to_usize().unwrap_or(0).min(n - 2);
        let w = x - lit::<T>(i as f64);
        self.values[i] * (T::one() - w) + self.values[i + 1] * w
    }

    /// ∫ζ|M|²dζ / ∫|M|²dζ.
    pub fn centroid(&self) -> T {
        let w = self.weights();
        let mut num = T::zero();
        let mut den = T::zero();
        for ((z, v), wi) in self.grid.iter().zip(&self.values).zip(&w) {
            let p = v.norm_sqr() * *wi;
            num += *z * p;
            den += p;
        }
        num / den
    }

    /// Expansion coefficient of a uniform initial state, c = ∫M dζ / ∫M² dζ.
    /// The operator is complex symmetric, so the projection uses the bilinear
    /// form without conjugation.
    pub fn uniform_projection(&self) -> Complex<T> {
        let w = self.weights();
        let mut num = Complex::new(T::zero(), T::zero());
        let mut den = Complex::new(T::zero(), T::zero());
        for (v, wi) in self.values.iter().zip(&w) {
            num = num + *v * *wi;
            den = den + *v * *v * *wi;
        }
        num / den
    }

    fn rotated(&self, phase: Complex<T>) -> Vec<Complex<T>> {
        self.values.iter().map(|v| *v * phase).collect()
    }
}

pub(crate) fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n];
    w[0] = h / lit(2.0);
    w[n - 1] = h / lit(2.0);
    w
}

/// Global phase that makes the grid point of largest modulus real positive.
fn max_modulus_gauge<T: Real>(values: &[Complex<T>]) -> Complex<T> {
    let mut best = values[0];
    for v in values {
        if v.norm() > best.norm() {
            best = *v;
        }
    }
    best.conj() / best.norm()
}

/// Phase e^{−iα/2} with α = arg ∫M(ζ)M(−ζ)dζ; a PT-symmetric mode satisfies
/// M(ζ) = conj M(−ζ) after this rotation.
fn pt_gauge<T: Real>(values: &[Complex<T>], w: &[T]) -> Complex<T> {
    let n = values.len();
    let mut c = Complex::new(T::zero(), T::zero());
    for i in 0..n {
        c = c + values[i] * values[n - 1 - i] * w[i];
    }
    Complex::from_polar(T::one(), -c.arg() / lit(2.0))
}

fn mirror_distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>], w: &[T]) -> T {
    let n = a.len();
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..n {
        num += (a[i] - b[n - 1 - i].conj()).norm() * w[i];
        den += a[i].norm() * w[i];
    }
    num / den
}

/// Returned by [`pt_symmetry_metrics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtMetrics<T> {
    pub eps1_m0: T,
    pub eps1_m1: T,
    pub eps12: T,
}

/// ε₁(M) = ∫|M(ζ) − M*(−ζ)| / ∫|M| for each mode, and
/// ε₁₂ = ∫|M₀(ζ) − M₁*(−ζ)| / ∫|M₀|, trapezoidal on the shared grid.
///
/// ε₁ uses the PT gauge of each mode; ε₁₂ puts both modes in the
/// max-modulus gauge.
pub fn pt_symmetry_metrics<T: Real>(m0: &EigenMode<T>, m1: &EigenMode<T>) -> Result<PtMetrics<T>> {
    let n = m0.grid.len();
    if n < 3 || m1.grid.len() != n || m0.values.len() != n || m1.values.len() != n {
        return Err(Error::GridMismatch);
    }
    let tol = lit::<T>(1e-12);
    for (i, (a, b)) in m0.grid.iter().zip(&m1.grid).enumerate() {
        if (*a - *b).abs() > tol || (*a + m0.grid[n - 1 - i]).abs() > tol {
            return Err(Error::GridMismatch);
        }
    }
    let w = m0.weights();
    let eps1 = |m: &EigenMode<T>| {
        let v = m.rotated(pt_gauge(&m.values, &w));
        mirror_distance(&v, &v, &w)
    };
    let a = m0.rotated(max_modulus_gauge(&m0.values));
    let b = m1.rotated(max_modulus_gauge(&m1.values));
    Ok(PtMetrics {
        eps1_m0: eps1(m0),
        eps1_m1: eps1(m1),
        eps12: mirror_distance(&a, &b, &w),
    })
}
