//! Exceptional points and the critical splitting above them.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::spectrum::{solve_spectrum, solve_spectrum_with, ContinuationOptions, Phase};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::special::bessel_j_zero;

/// Highest exceptional point index supported.
pub const MAX_EP_INDEX: usize = 10;

/// (g′ₚ, qₚ) with g′ₚ = (27√3/32)·jₚ² and qₚ = g′ₚ/√3, jₚ the p-th positive
/// zero of J₋₂/₃.
pub fn ep_location<T: Real>(p: usize) -> Result<(T, T)> {
    if p == 0 || p > MAX_EP_INDEX {
        return Err(Error::InvalidInput(format!(
            "exceptional point index must be in 1..={MAX_EP_INDEX}, got {p}"
        )));
    }
    let j: f64 = bessel_j_zero(-2.0 / 3.0, p)?;
    let sqrt3 = 3f64.sqrt();
    let g = 27.0 * sqrt3 / 32.0 * j * j;
    Ok((lit(g), lit(g / sqrt3)))
}

/// An exceptional point located directly from the shooting spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocatedEp<T> {
    pub g_prime: T,
    pub q: Complex<T>,
    pub iterations: usize,
}

fn discriminant<T: Real>(g: T, p: usize) -> Result<(T, Complex<T>)> {
    // no snapping: the pair must be resolved right up to the merge
    let opts = ContinuationOptions {
        ep_snap: 0.0,
        ..ContinuationOptions::default()
    };
    let s = solve_spectrum_with(g, 2 * p - 1, opts)?;
    let (a, b) = (s.q[2 * p - 2], s.q[2 * p - 1]);
    let d = (b - a) * (b - a);
    Ok((d.re, (a + b) / lit::<T>(2.0)))
}

/// Finds g′ₚ as the sign change of (q₂ₚ₋₁ − q₂ₚ₋₂)², which is real, positive
/// below the exceptional point and negative above it. Brackets [lo, hi] must
/// straddle it.
pub fn locate_ep_numeric<T: Real>(p: usize, lo: T, hi: T) -> Result<LocatedEp<T>> {
    if p == 0 {
        return Err(Error::InvalidInput("exceptional point index starts at 1".into()));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, _) = discriminant(a, p)?;
    let (mut fb, _) = discriminant(b, p)?;
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!(
            "discriminant does not change sign on [{lo}, {hi}]"
        )));
    }
    let tol = lit::<T>(1e-10);
    let mut best = (a, fa.abs());
    for it in 0..100 {
        // secant guess, safeguarded by bisection
        let mut x = b - fb * (b - a) / (fb - fa);
        let width = (b - a).abs();
        if !(x > a.min(b) && x < a.max(b)) || (x - a).abs() < width * lit(0.05) || (b - x).abs() < width * lit(0.05) {
            x = (a + b) / lit(2.0);
        }
        let (fx, centre) = discriminant(x, p)?;
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a).abs() < tol {
            let g = (a + b) / lit(2.0);
            return Ok(LocatedEp {
                g_prime: g,
                q: centre,
                iterations: it + 1,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: 100,
        residual: best.1.as_f64(),
    })
}

/// Δ = Im[q₁] − Im[q₀] and the phase it was evaluated in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting<T> {
    pub delta: T,
    pub phase: Phase,
}

/// Frequency splitting of the lowest pair; zero in the symmetric phase.
pub fn frequency_splitting<T: Real>(g_prime: T) -> Result<Splitting<T>> {
    let s = solve_spectrum(g_prime, 1)?;
    let delta = match s.phase {
        Phase::Broken => s.q[1].im - s.q[0].im,
        _ => T::zero(),
    };
    Ok(Splitting {
        delta,
        phase: s.phase,
    })
}
