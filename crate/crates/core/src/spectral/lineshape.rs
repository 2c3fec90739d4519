//! Lorentzian model functions |Y(ω)| and their parameter gradients.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fid::FidModel;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    /// One peak: A₁, τ₁, ω₁, b.
    Slp,
    /// Two interfering peaks: A₁, A₂, τ₁, τ₂, ω₁, ω₂, Δφ, b.
    Dlp,
    /// Symmetric triplet at ω₀ − Δω_Q, ω₀, ω₀ + Δω_Q with zero phases.
    Tlp,
    /// DLP plus the negative-frequency mirror lines. The mirrors make the
    /// absolute phase φ₁ observable, so it is a ninth parameter. Removes the
    /// leakage bias of DLP when 1/(ωτ) is not negligible.
    Dlpm,
}

impl ModelKind {
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Slp => &["A1", "tau1", "omega1", "b"],
            ModelKind::Dlp => &["A1", "A2", "tau1", "tau2", "omega1", "omega2", "delta_phi", "b"],
            ModelKind::Tlp => &["A1", "A2", "A3", "tau1", "tau2", "tau3", "omega0", "delta_omega_q", "b"],
            ModelKind::Dlpm => &["A1", "A2", "tau1", "tau2", "omega1", "omega2", "delta_phi", "phi1", "b"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    pub fn n_peaks(self) -> usize {
        match self {
            ModelKind::Slp => 1,
            ModelKind::Dlp | ModelKind::Dlpm => 2,
            ModelKind::Tlp => 3,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Slp => "slp",
            ModelKind::Dlp => "dlp",
            ModelKind::Tlp => "tlp",
            ModelKind::Dlpm => "dlpm",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "slp" => Ok(ModelKind::Slp),
            "dlp" => Ok(ModelKind::Dlp),
            "tlp" => Ok(ModelKind::Tlp),
            "dlpm" => Ok(ModelKind::Dlpm),
            other => Err(Error::InvalidInput(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Y(ω) of a sum of decaying sinusoids, mirror terms included.
pub fn lorentzian_transform<T: Real>(model: &FidModel<T>, omega: T) -> Complex<T> {
    let pre = Complex::new(T::zero(), -T::one()) / lit::<T>(8.0 * std::f64::consts::PI).sqrt();
    let sum: Complex<T> = model
        .components
        .iter()
        .map(|c| {
            let g = T::one() / c.tau;
            let pos = Complex::from_polar(c.amplitude, c.phase) / Complex::new(g, omega - c.omega);
            let neg = Complex::from_polar(c.amplitude, -c.phase) / Complex::new(g, omega + c.omega);
            pos - neg
        })
        .sum();
    pre * sum
}

/// One complex Lorentzian term s·c/(1/τ + i(ω − sω_k)), c = A e^{isφ}, with
/// the parameter slots it depends on. s = −1 marks a mirror line.
#[derive(Clone, Copy)]
struct Term<T> {
    amp: T,
    phase: T,
    tau: T,
    center: T,
    sign: T,
    i_amp: usize,
    i_tau: usize,
    /// (slot, ∂ω_k/∂slot).
    i_center: [(usize, T); 2],
    /// (slot, ∂φ/∂slot).
    i_phase: [(usize, T); 2],
}

const NONE: usize = usize::MAX;

impl<T: Real> Term<T> {
    fn line(amp: T, tau: T, center: T, slots: (usize, usize), i_center: [(usize, T); 2]) -> Self {
        Term {
            amp,
            phase: T::zero(),
            tau,
            center,
            sign: T::one(),
            i_amp: slots.0,
            i_tau: slots.1,
            i_center,
            i_phase: [(NONE, T::zero()); 2],
        }
    }

    fn with_phase(mut self, phase: T, i_phase: [(usize, T); 2]) -> Self {
        self.phase = phase;
        self.i_phase = i_phase;
        self
    }

    fn mirrored(&self) -> Self {
        Term { sign: -self.sign, ..*self }
    }
}

fn terms<T: Real>(kind: ModelKind, p: &[T]) -> Vec<Term<T>> {
    let one = T::one();
    let nil = (NONE, T::zero());
    match kind {
        ModelKind::Slp => vec![Term::line(p[0], p[1], p[2], (0, 1), [(2, one), nil])],
        ModelKind::Dlp => vec![
            Term::line(p[0], p[2], p[4], (0, 2), [(4, one), nil]),
            Term::line(p[1], p[3], p[5], (1, 3), [(5, one), nil]).with_phase(p[6], [(6, one), nil]),
        ],
        ModelKind::Tlp => (0..3)
            .map(|k| {
                let sign = lit::<T>(k as f64 - 1.0);
                Term::line(p[k], p[3 + k], p[6] + sign * p[7], (k, 3 + k), [(6, one), (7, sign)])
            })
            .collect(),
        ModelKind::Dlpm => {
            let first = Term::line(p[0], p[2], p[4], (0, 2), [(4, one), nil]).with_phase(p[7], [(7, one), nil]);
            let second =
                Term::line(p[1], p[3], p[5], (1, 3), [(5, one), nil]).with_phase(p[7] + p[6], [(7, one), (6, one)]);
            vec![first, second, first.mirrored(), second.mirrored()]
        }
    }
}

/// Model value |Y(ω; p)| + b. When `grad` is given it receives ∂/∂p.
pub fn model_value<T: Real>(kind: ModelKind, p: &[T], omega: T, grad: Option<&mut [T]>) -> T {
    let norm = T::one() / lit::<T>(8.0 * std::f64::consts::PI).sqrt();
    let b = p[kind.n_params() - 1];
    let ts = terms(kind, p);
    let mut z = Complex::new(T::zero(), T::zero());
    let mut parts = Vec::with_capacity(ts.len());
    for t in &ts {
        let den = Complex::new(T::one() / t.tau, omega - t.sign * t.center);
        let unit = Complex::from_polar(t.sign, t.sign * t.phase) / den;
        z = z + unit * t.amp;
        parts.push((unit, den));
    }
    let mag = z.norm();
    if let Some(g) = grad {
        g.iter_mut().for_each(|v| *v = T::zero());
        let last = g.len() - 1;
        g[last] = T::one();
        if mag > T::min_positive_value() {
            let zc = z.conj() / mag;
            // ∂|z|/∂x = Re(z̄ ∂z/∂x)/|z|
            let d = |dz: Complex<T>| (zc * dz).re * norm;
            for (t, (unit, den)) in ts.iter().zip(&parts) {
                let l = *unit * t.amp;
                let is = Complex::new(T::zero(), t.sign);
                g[t.i_amp] += d(*unit);
                g[t.i_tau] += d(l / *den / (t.tau * t.tau));
                let dw = d(l / *den * is);
                for (slot, f) in t.i_center {
                    if slot != NONE {
                        g[slot] += dw * f;
                    }
                }
                let dp = d(l * is);
                for (slot, f) in t.i_phase {
                    if slot != NONE {
                        g[slot] += dp * f;
                    }
                }
            }
        }
    }
    mag * norm + b
}
