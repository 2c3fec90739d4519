//! Complex shooting for M″ = (ig′ζ − q)M with M(−1) = 1, M′(−1) = 0.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Fixed-step classical RK4 integrator across ζ ∈ [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shooter {
    pub steps: usize,
}

impl Default for Shooter {
    fn default() -> Self {
        Self { steps: 4000 }
    }
}

/// End state of one shot.
#[derive(Debug, Clone, Copy)]
pub struct Shot<T> {
    pub value: Complex<T>,
    pub derivative: Complex<T>,
    /// max |M| along the trajectory.
    pub scale: T,
}

impl Shooter {
    /// Integrates the trajectory, calling `visit(step_index, M, M′)` at every
    /// node including both ends.
    pub fn integrate<T: Real>(
        &self,
        g_prime: T,
        q: Complex<T>,
        mut visit: impl FnMut(usize, Complex<T>, Complex<T>),
    ) -> Result<Shot<T>> {
        let n = self.steps.max(2);
        let h = lit::<T>(2.0) / lit::<T>(n as f64);
        let half = h / lit(2.0);
        let sixth = h / lit(6.0);
        let two = lit::<T>(2.0);
        let coef = |zeta: T| Complex::new(-q.re, g_prime * zeta - q.im);

        let mut m = Complex::new(T::one(), T::zero());
        let mut p = Complex::new(T::zero(), T::zero());
        let mut scale = T::one();
        visit(0, m, p);
        for i in 0..n {
            let z0 = -T::one() + h * lit::<T>(i as f64);
            let a0 = coef(z0);
            let am = coef(z0 + half);
            let a1 = coef(z0 + h);

            let k1m = p;
            let k1p = a0 * m;
            let k2m = p + k1p * half;
            let k2p = am * (m + k1m * half);
            let k3m = p + k2p * half;
            let k3p = am * (m + k2m * half);
            let k4m = p + k3p * h;
            let k4p = a1 * (m + k3m * h);

            m = m + (k1m + k2m * two + k3m * two + k4m) * sixth;
            p = p + (k1p + k2p * two + k3p * two + k4p) * sixth;
            let r = m.norm();
            if !r.is_finite() || !p.norm().is_finite() {
                return Err(Error::NumericFailure(format!(
                    "shooting overflow at zeta={}, q={q}",
                    z0 + h
                )));
            }
            if r > scale {
                scale = r;
            }
            visit(i + 1, m, p);
        }
        Ok(Shot {
            value: m,
            derivative: p,
            scale,
        })
    }

    pub fn shoot<T: Real>(&self, g_prime: T, q: Complex<T>) -> Result<Shot<T>> {
        self.integrate(g_prime, q, |_, _, _| {})
    }

    /// Multiplicity-aware Newton iteration on the boundary mismatch, deflated
    /// by already known roots. The derivative is a central difference in q.
    pub fn newton<T: Real>(
        &self,
        g_prime: T,
        seed: Complex<T>,
        known: &[Complex<T>],
    ) -> Result<Complex<T>> {
        let deflated = |q: Complex<T>| -> Result<(Complex<T>, Shot<T>)> {
            let shot = self.shoot(g_prime, q)?;
            let mut f = shot.derivative;
            for r in known {
                f = f / (q - r);
            }
            Ok((f, shot))
        };
        let tol = lit::<T>(T::ROOT_TOL);
        let tiny = T::epsilon() * lit(64.0);
        let mut q = seed;
        let (mut f, mut shot) = deflated(q)?;
        let mut last_step = T::infinity();
        for it in 0..80 {
            if shot.derivative.norm() <= tol * shot.scale {
                return Ok(q);
            }
            let h = lit::<T>(T::DIFF_STEP) * T::one().max(q.norm());
            let hc = Complex::new(h, T::zero());
            let (fp, _) = deflated(q + hc)?;
            let (fm, _) = deflated(q - hc)?;
            let df = (fp - fm) / (hc * lit::<T>(2.0));
            if df.norm() == T::zero() || !df.norm().is_finite() {
                return Err(Error::NumericFailure(format!(
                    "vanishing derivative in Newton at q={q}"
                )));
            }
            let mut step = f / df;
            let cap = lit::<T>(0.5) * T::one().max(q.norm());
            if step.norm() > cap {
                step = step * (cap / step.norm());
            }
            // backtrack on the deflated modulus
            let mut accepted = None;
            for _ in 0..12 {
                let trial = q - step;
                let (ft, st) = deflated(trial)?;
                if ft.norm() < f.norm() || step.norm() <= tiny * T::one().max(q.norm()) {
                    accepted = Some((trial, ft, st));
                    break;
                }
                step = step / lit::<T>(2.0);
            }
            let Some((qn, fn_, sn)) = accepted else {
                return Err(Error::NotConverged {
                    iterations: it,
                    residual: shot.derivative.norm().as_f64(),
                });
            };
            let moved = (qn - q).norm();
            q = qn;
            f = fn_;
            shot = sn;
            if moved <= tiny * T::one().max(q.norm()) && last_step <= tiny * lit(1e3) * T::one().max(q.norm()) {
                if shot.derivative.norm() <= tol * lit(1e3) * shot.scale {
                    return Ok(q);
                }
            }
            last_step = moved;
        }
        Err(Error::NotConverged {
            iterations: 80,
            residual: shot.derivative.norm().as_f64(),
        })
    }
}

/// M′(+1) for the trajectory started at ζ = −1 with M = 1, M′ = 0.
pub fn boundary_mismatch<T: Real>(q: Complex<T>, g_prime: T) -> Result<Complex<T>> {
    if !q.re.is_finite() || !q.im.is_finite() || !g_prime.is_finite() {
        return Err(Error::NonFinite("boundary_mismatch input"));
    }
    Ok(Shooter::default().shoot(g_prime, q)?.derivative)
}
