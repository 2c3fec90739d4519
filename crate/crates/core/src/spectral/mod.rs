//! Periodogram estimation and multi-Lorentzian least-squares fitting.

mod fit;
mod lineshape;

pub use fit::{dlp_partner, extract_observables, fit, FitInit, FitReport, ObservableContext, Observables};
pub use lineshape::{lorentzian_transform, model_value, ModelKind};

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fid::TimeSeries;
use crate::scalar::{lit, Real};

pub const DEFAULT_OVERSAMPLE: f64 = 10.0;
pub const MIN_SAMPLES: usize = 64;
/// Records are cut at this many T₂.
pub const TRIM_T2_MULTIPLE: f64 = 12.0;

/// Single-sided power spectrum P̂(ω) = (Δt/N)|Σ yₙ e^{−iωtₙ}|².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram<T> {
    /// rad/s.
    pub omega_grid: Vec<T>,
    pub power: Vec<T>,
    /// T = NΔt, s.
    pub total_time: T,
    pub oversample: T,
}

impl<T: Real> Periodogram<T> {
    /// √(P̂T/2π), which approximates |Y(ω)|.
    pub fn amplitude(&self) -> Vec<T> {
        let k = self.total_time / T::TAU();
        self.power.iter().map(|p| (*p * k).sqrt()).collect()
    }

    /// Grid points and amplitudes with lo ≤ ω ≤ hi.
    pub fn window(&self, lo: T, hi: T) -> (Vec<T>, Vec<T>) {
        let amp = self.amplitude();
        self.omega_grid
            .iter()
            .zip(amp)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(w, a)| (*w, a))
            .unzip()
    }

    /// (ω, P̂) at the largest power.
    pub fn peak(&self) -> Option<(T, T)> {
        self.omega_grid
            .iter()
            .zip(&self.power)
            .filter(|(w, _)| **w > T::zero())
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(w, p)| (*w, *p))
    }
}

fn check_series<T: Real>(series: &TimeSeries<T>, oversample: T) -> Result<()> {
    if series.t.len() != series.y.len() {
        return Err(Error::InvalidInput("t and y lengths differ".into()));
    }
    if series.len() < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "periodogram needs at least {MIN_SAMPLES} samples, got {}",
            series.len()
        )));
    }
    if !(oversample >= T::one()) || oversample > lit(64.0) {
        return Err(Error::InvalidInput(format!("oversample {oversample} outside [1, 64]")));
    }
    if series.t.iter().chain(&series.y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("time series"));
    }
    if let Some(i) = series.t.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::DegenerateTimestamps(format!(
            "stamps {} and {} at index {i} are not strictly increasing",
            series.t[i],
            series.t[i + 1]
        )));
    }
    Ok(())
}

/// Periodogram on the grid ωⱼ = 2πj/(T·oversample).
///
/// Uniform stamps use a zero-padded FFT. Non-uniform stamps use the
/// Lomb–Scargle least-squares estimate scaled by T/N, which reduces to the
/// same P̂ when the stamps happen to be uniform.
pub fn periodogram<T: Real>(series: &TimeSeries<T>, oversample: T) -> Result<Periodogram<T>> {
    check_series(series, oversample)?;
    match series.uniform_step() {
        Some(dt) => Ok(fft_periodogram(&series.y, dt, oversample)),
        None => {
            let n = series.len();
            let dt = (series.t[n - 1] - series.t[0]) / lit::<T>((n - 1) as f64);
            let total = dt * lit::<T>(n as f64);
            let dw = T::TAU() / (total * oversample);
            let nyquist = T::PI() / dt;
            let m = (nyquist / dw).floor().to_usize().unwrap_or(0);
            let grid: Vec<T> = (0..=m).map(|j| dw * lit::<T>(j as f64)).collect();
            Ok(lomb_scargle(series, grid, total, oversample))
        }
    }
}

/// Same estimate restricted to lo ≤ ω ≤ hi. Cheap for non-uniform input.
pub fn periodogram_band<T: Real>(series: &TimeSeries<T>, oversample: T, lo: T, hi: T) -> Result<Periodogram<T>> {
    check_series(series, oversample)?;
    if !(hi > lo) {
        return Err(Error::InvalidInput("empty frequency band".into()));
    }
    if series.uniform_step().is_some() {
        let mut p = periodogram(series, oversample)?;
        let keep: Vec<bool> = p.omega_grid.iter().map(|w| *w >= lo && *w <= hi).collect();
        let mut it = keep.iter();
        p.omega_grid.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        p.power.retain(|_| *it.next().unwrap());
        return Ok(p);
    }
    let n = series.len();
    let dt = (series.t[n - 1] - series.t[0]) / lit::<T>((n - 1) as f64);
    let total = dt * lit::<T>(n as f64);
    let dw = T::TAU() / (total * oversample);
    let j0 = (lo.max(T::zero()) / dw).ceil().to_usize().unwrap_or(0);
    let j1 = (hi / dw).floor().to_usize().unwrap_or(0);
    let grid: Vec<T> = (j0..=j1).map(|j| dw * lit::<T>(j as f64)).collect();
    Ok(lomb_scargle(series, grid, total, oversample))
}

fn fft_periodogram<T: Real>(y: &[T], dt: T, oversample: T) -> Periodogram<T> {
    let n = y.len();
    let m = (lit::<T>(n as f64) * oversample).round().to_usize().unwrap_or(n).max(n);
    let mut buf: Vec<Complex<T>> = y.iter().map(|v| Complex::new(*v, T::zero())).collect();
    buf.resize(m, Complex::new(T::zero(), T::zero()));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = dt / lit::<T>(n as f64);
    let dw = T::TAU() / (lit::<T>(m as f64) * dt);
    let half = m / 2;
    Periodogram {
        omega_grid: (0..=half).map(|j| dw * lit::<T>(j as f64)).collect(),
        power: buf[..=half].iter().map(|c| c.norm_sqr() * scale).collect(),
        total_time: dt * lit::<T>(n as f64),
        oversample,
    }
}

fn lomb_scargle<T: Real>(series: &TimeSeries<T>, grid: Vec<T>, total: T, oversample: T) -> Periodogram<T> {
    let n = lit::<T>(series.len() as f64);
    let t0 = series.t[0];
    let power = grid
        .par_iter()
        .map(|&w| {
            if w == T::zero() {
                let s: T = series.y.iter().copied().sum();
                return s * s / n * (total / n);
            }
            let (mut s2, mut c2) = (T::zero(), T::zero());
            for &t in &series.t {
                let a = lit::<T>(2.0) * w * (t - t0);
                s2 += a.sin();
                c2 += a.cos();
            }
            let tau = s2.atan2(c2) / (lit::<T>(2.0) * w);
            let (mut yc, mut ys, mut cc, mut ss) = (T::zero(), T::zero(), T::zero(), T::zero());
            for (&t, &y) in series.t.iter().zip(&series.y) {
                let (s, c) = (w * (t - t0 - tau)).sin_cos();
                yc += y * c;
                ys += y * s;
                cc += c * c;
                ss += s * s;
            }
            let mut p = T::zero();
            if cc > T::zero() {
                p += yc * yc / cc;
            }
            if ss > T::zero() {
                p += ys * ys / ss;
            }
            p / lit::<T>(2.0) * (total / n)
        })
        .collect();
    Periodogram {
        omega_grid: grid,
        power,
        total_time: total,
        oversample,
    }
}

/// A series cut to a maximum length, with the limit that was applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trimmed<T> {
    pub series: TimeSeries<T>,
    /// Maximum retained span (s) measured from the first sample.
    pub trim_length: T,
    pub truncated: bool,
}

/// Keeps samples with t − t₀ ≤ 12·T₂.
pub fn trim_policy<T: Real>(series: &TimeSeries<T>, t2_estimate: T) -> Result<Trimmed<T>> {
    if !(t2_estimate > T::zero()) || !t2_estimate.is_finite() {
        return Err(Error::InvalidInput("t2_estimate must be positive".into()));
    }
    if series.is_empty() {
        return Err(Error::EmptySeries("nothing to trim".into()));
    }
    let limit = lit::<T>(TRIM_T2_MULTIPLE) * t2_estimate;
    let start = series.t[0];
    let keep = series.t.iter().take_while(|t| **t - start <= limit).count();
    if keep == 0 {
        return Err(Error::EmptySeries("trim removed every sample".into()));
    }
    Ok(Trimmed {
        series: TimeSeries {
            t: series.t[..keep].to_vec(),
            y: series.y[..keep].to_vec(),
        },
        trim_length: limit,
        truncated: keep < series.len(),
    })
}

/// Drops the first `t0` seconds and restarts the clock: y′(t) = y(t + t₀′).
/// Returns the series and the offset t₀′ actually applied, which is the
/// first stamp at or after t₀ (to within a part in 10⁶ of a sample).
pub fn trim_start<T: Real>(series: &TimeSeries<T>, t0: T) -> Result<(TimeSeries<T>, T)> {
    if !(t0 >= T::zero()) {
        return Err(Error::InvalidInput("trim start must be >= 0".into()));
    }
    if series.is_empty() {
        return Err(Error::EmptySeries("nothing to trim".into()));
    }
    let start = series.t[0];
    let slack = series.uniform_step().unwrap_or(T::zero()) * lit(1e-6);
    let k = series.t.iter().position(|t| *t - start >= t0 - slack);
    let k = k.ok_or_else(|| Error::EmptySeries(format!("trim start {t0} beyond the record")))?;
    let applied = series.t[k] - start;
    let origin = series.t[k];
    Ok((
        TimeSeries {
            t: series.t[k..].iter().map(|t| *t - origin).collect(),
            y: series.y[k..].to_vec(),
        },
        applied,
    ))
}
