//! Bound-constrained Levenberg–Marquardt fitting of the Lorentzian models to
//! the amplitude spectrum √(P̂T/2π).

use indexmap::IndexMap;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::lineshape::{model_value, ModelKind};
use super::Periodogram;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, spd_inverse, Matrix};
use crate::scalar::{lit, wrap_angle, Real};
use crate::stats::t975;

/// Fit window half-width in linewidths (1/τ) around the outermost peaks.
pub const WINDOW_LINEWIDTHS: f64 = 20.0;
pub const DEFAULT_MAX_ITER: usize = 500;

/// Starting point and options for [`fit`]. Every field is optional: missing
/// parameters are estimated from the spectrum by peak picking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitInit<T> {
    /// Full parameter vector in [`ModelKind::param_names`] order.
    pub params: Option<Vec<T>>,
    /// Δφ starting value for DLP.
    pub phi0: Option<T>,
    /// Δω_Q starting value for TLP.
    pub delta_omega_q: Option<T>,
    /// Peak search band (rad/s).
    pub search_band: Option<(T, T)>,
    /// Explicit fit window (rad/s); defaults to ±20 linewidths.
    pub window: Option<(T, T)>,
    pub max_iter: usize,
}

impl<T> Default for FitInit<T> {
    fn default() -> Self {
        Self {
            params: None,
            phi0: None,
            delta_omega_q: None,
            search_band: None,
            window: None,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl<T> FitInit<T> {
    pub fn from_params(params: Vec<T>) -> Self {
        Self {
            params: Some(params),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport<T> {
    pub model_kind: ModelKind,
    pub params: IndexMap<String, T>,
    /// 95% confidence half-widths; NaN when the Jacobian is rank deficient.
    pub ci95: IndexMap<String, T>,
    pub adj_r2: T,
    pub converged: bool,
    pub rank_deficient: bool,
    pub n_iter: usize,
    pub n_points: usize,
    pub rss: T,
    /// (lo, hi) in rad/s.
    pub window: (T, T),
}

impl<T: Real> FitReport<T> {
    pub fn get(&self, name: &str) -> T {
        self.params.get(name).copied().unwrap_or_else(T::nan)
    }

    pub fn ci(&self, name: &str) -> T {
        self.ci95.get(name).copied().unwrap_or_else(T::nan)
    }

    pub fn values(&self) -> Vec<T> {
        self.params.values().copied().collect()
    }
}

fn lower_bounds<T: Real>(kind: ModelKind, p0: &[T]) -> Vec<T> {
    let amp = kind.n_peaks();
    // A line broader than the whole fit window is indistinguishable from the
    // background, so τ may not drop below 1/20 of its smallest start value.
    let tau_floor = p0[amp..2 * amp].iter().copied().fold(T::infinity(), T::min) / lit(20.0);
    let amp_floor = p0[..amp].iter().copied().fold(T::zero(), T::max) * lit(1e-12);
    let mut lo = vec![T::neg_infinity(); kind.n_params()];
    for v in lo.iter_mut().take(amp) {
        *v = amp_floor.max(T::min_positive_value());
    }
    for v in lo.iter_mut().skip(amp).take(amp) {
        *v = tau_floor.max(T::min_positive_value());
    }
    lo[kind.n_params() - 1] = T::zero();
    lo
}

fn project<T: Real>(p: &mut [T], lo: &[T]) {
    for (v, l) in p.iter_mut().zip(lo) {
        if *v < *l {
            *v = *l;
        }
    }
}

struct Problem<'a, T> {
    kind: ModelKind,
    x: &'a [T],
    y: &'a [T],
}

impl<T: Real> Problem<'_, T> {
    fn rss(&self, p: &[T]) -> T {
        self.x
            .iter()
            .zip(self.y)
            .map(|(x, y)| {
                let r = model_value(self.kind, p, *x, None) - *y;
                r * r
            })
            .sum()
    }

    /// (JᵀJ, Jᵀr, rss).
    fn normal(&self, p: &[T]) -> (Matrix<T>, Vec<T>, T) {
        let n = p.len();
        let mut a = vec![vec![T::zero(); n]; n];
        let mut g = vec![T::zero(); n];
        let mut rss = T::zero();
        let mut row = vec![T::zero(); n];
        for (x, y) in self.x.iter().zip(self.y) {
            let r = model_value(self.kind, p, *x, Some(&mut row)) - *y;
            rss += r * r;
            for i in 0..n {
                g[i] += row[i] * r;
                for j in 0..=i {
                    a[i][j] += row[i] * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                a[j][i] = a[i][j];
            }
        }
        (a, g, rss)
    }
}

struct LmOutcome<T> {
    p: Vec<T>,
    iterations: usize,
    converged: bool,
}

fn levenberg_marquardt<T: Real>(prob: &Problem<'_, T>, p0: &[T], lo: &[T], scale: &[T], max_iter: usize) -> LmOutcome<T> {
    let eps = T::epsilon();
    let xtol = eps.sqrt() * lit(1e-2);
    let ftol = eps * lit(1e3);
    let mut p = p0.to_vec();
    project(&mut p, lo);
    let (mut a, mut g, mut rss) = prob.normal(&p);
    let mut lambda = lit::<T>(1e-3);
    let n = p.len();
    for it in 1..=max_iter {
        if rss == T::zero() {
            return LmOutcome { p, iterations: it - 1, converged: true };
        }
        let dmax = (0..n).map(|i| a[i][i]).fold(T::zero(), T::max);
        let diag: Vec<T> = (0..n).map(|i| a[i][i].max(dmax * eps)).collect();
        // Parameters held at a bound by the gradient drop out of the step.
        let active: Vec<bool> = (0..n).map(|i| p[i] <= lo[i] && g[i] > T::zero()).collect();
        loop {
            let mut m = a.clone();
            for i in 0..n {
                m[i][i] += lambda * diag[i];
            }
            let mut neg_g: Vec<T> = g.iter().map(|v| -*v).collect();
            for i in (0..n).filter(|&i| active[i]) {
                for j in 0..n {
                    m[i][j] = T::zero();
                    m[j][i] = T::zero();
                }
                m[i][i] = T::one();
                neg_g[i] = T::zero();
            }
            let step = match cholesky(&m, T::zero()) {
                Some(l) => cholesky_solve(&l, &neg_g),
                None => {
                    lambda *= lit(10.0);
                    if lambda > lit(1e16) {
                        return LmOutcome { p, iterations: it, converged: false };
                    }
                    continue;
                }
            };
            let mut trial: Vec<T> = p.iter().zip(&step).map(|(a, b)| *a + *b).collect();
            project(&mut trial, lo);
            let trial_rss = prob.rss(&trial);
            if trial_rss.is_finite() && trial_rss <= rss {
                let small_step = trial
                    .iter()
                    .zip(&p)
                    .zip(scale)
                    .all(|((t, q), s)| (*t - *q).abs() <= xtol * (q.abs() + *s));
                let small_drop = rss - trial_rss <= ftol * rss;
                p = trial;
                let (a2, g2, r2) = prob.normal(&p);
                a = a2;
                g = g2;
                rss = r2;
                lambda = (lambda / lit(3.0)).max(lit(1e-15));
                // A heavily damped step is short and gains little even far
                // from the optimum, so also ask the undamped step.
                if (small_step || small_drop) && gauss_newton_gain(&a, &g, &p, lo) <= ftol * rss {
                    return LmOutcome { p, iterations: it, converged: true };
                }
                break;
            }
            lambda *= lit(4.0);
            if lambda > lit(1e16) {
                // No descent direction left at working precision.
                return LmOutcome { p, iterations: it, converged: true };
            }
        }
    }
    LmOutcome { p, iterations: max_iter, converged: false }
}

/// Predicted rss decrease −gᵀ(JᵀJ)⁻¹g of the Gauss–Newton step, bound-held
/// parameters excluded. Zero when JᵀJ is singular: no reliable direction.
fn gauss_newton_gain<T: Real>(a: &Matrix<T>, g: &[T], p: &[T], lo: &[T]) -> T {
    let free: Vec<usize> = (0..p.len()).filter(|&i| !(p[i] <= lo[i] && g[i] > T::zero())).collect();
    let d: Vec<T> = free.iter().map(|&i| a[i][i].sqrt()).collect();
    if d.iter().any(|v| *v <= T::zero()) {
        return T::zero();
    }
    let m: Matrix<T> = (0..free.len())
        .map(|i| (0..free.len()).map(|j| a[free[i]][free[j]] / (d[i] * d[j])).collect())
        .collect();
    let gs: Vec<T> = (0..free.len()).map(|i| g[free[i]] / d[i]).collect();
    match cholesky(&m, T::epsilon() * lit(1e3)) {
        Some(l) => {
            let x = cholesky_solve(&l, &gs);
            x.iter().zip(&gs).map(|(u, v)| *u * *v).sum::<T>().max(T::zero())
        }
        None => T::zero(),
    }
}

fn canonicalize<T: Real>(kind: ModelKind, p: &mut [T]) {
    match kind {
        ModelKind::Slp => {}
        ModelKind::Dlp => {
            if p[4] > p[5] {
                p.swap(0, 1);
                p.swap(2, 3);
                p.swap(4, 5);
                p[6] = -p[6];
            }
            p[6] = wrap_angle(p[6]);
        }
        ModelKind::Dlpm => {
            // A line at −ω with phase φ is the mirror of one at +ω with π − φ.
            let mut phase = [p[7], p[7] + p[6]];
            for k in 0..2 {
                if p[4 + k] < T::zero() {
                    p[4 + k] = -p[4 + k];
                    phase[k] = T::PI() - phase[k];
                }
            }
            p[7] = phase[0];
            p[6] = phase[1] - phase[0];
            if p[4] > p[5] {
                p.swap(0, 1);
                p.swap(2, 3);
                p.swap(4, 5);
                p[7] = p[7] + p[6];
                p[6] = -p[6];
            }
            p[6] = wrap_angle(p[6]);
            // Flipping the sign of every line leaves |Y| unchanged.
            p[7] = wrap_angle(p[7] + p[7]) / lit(2.0);
        }
        ModelKind::Tlp => {
            if p[7] < T::zero() {
                p[7] = -p[7];
                p.swap(0, 2);
                p.swap(3, 5);
            }
        }
    }
}

fn half_power_width<T: Real>(omega: &[T], amp: &[T], j: usize, lo: usize, hi: usize) -> T {
    let level = amp[j] * T::FRAC_1_SQRT_2();
    let cross = |k0: usize, k1: usize| {
        let f = (amp[k0] - level) / (amp[k0] - amp[k1]);
        omega[k0] + (omega[k1] - omega[k0]) * f
    };
    let mut l = j;
    while l > lo && amp[l - 1] > level {
        l -= 1;
    }
    let wl = if l > lo { cross(l, l - 1) } else { omega[lo] };
    let mut r = j;
    while r + 1 < hi && amp[r + 1] > level {
        r += 1;
    }
    let wr = if r + 1 < hi { cross(r, r + 1) } else { omega[hi - 1] };
    let step = if omega.len() > 1 { omega[1] - omega[0] } else { T::one() };
    (wr - wl).max(step)
}

/// Peak-picking starting points. The first is the primary guess; DLP adds
/// alternatives for peaks that overlap into a single maximum.
pub(crate) fn initial_guesses<T: Real>(spectrum: &Periodogram<T>, kind: ModelKind, init: &FitInit<T>) -> Result<Vec<Vec<T>>> {
    let omega = &spectrum.omega_grid;
    let amp = spectrum.amplitude();
    let (blo, bhi) = init.search_band.unwrap_or((T::min_positive_value(), T::infinity()));
    let lo = omega.iter().position(|w| *w >= blo).unwrap_or(omega.len());
    let hi = omega.iter().rposition(|w| *w <= bhi).map_or(0, |k| k + 1);
    if hi <= lo + 2 {
        return Err(Error::InvalidInput("peak search band holds no spectrum points".into()));
    }
    let j = (lo..hi)
        .max_by(|&a, &b| amp[a].partial_cmp(&amp[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(lo);
    let norm = lit::<T>(8.0 * std::f64::consts::PI).sqrt();
    let width = half_power_width(omega, &amp, j, lo, hi);
    let tau = lit::<T>(2.0) / width;
    let a0 = amp[j] * norm / tau;
    let mut peaks = vec![(omega[j], a0)];
    // Further peaks: largest excess over the peaks found so far, searched
    // within the fit window of the main peak.
    let reach = lit::<T>(WINDOW_LINEWIDTHS) / tau;
    let near: Vec<usize> = (lo..hi).filter(|&k| (omega[k] - omega[j]).abs() <= reach).collect();
    for _ in 1..kind.n_peaks() {
        let excess = |k: usize| {
            let model: T = peaks
                .iter()
                .map(|(w, a)| *a / Complex::new(T::one() / tau, omega[k] - *w).norm() / norm)
                .sum();
            amp[k] - model
        };
        let best = near
            .iter()
            .copied()
            .max_by(|&a, &b| excess(a).partial_cmp(&excess(b)).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(j);
        let e = excess(best).max(amp[j] * lit(0.05));
        peaks.push((omega[best], e * norm / tau));
    }
    peaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let b = T::zero();
    let phi0 = init.phi0.unwrap_or(T::zero());
    Ok(match kind {
        ModelKind::Slp => vec![vec![a0, tau, omega[j], b]],
        ModelKind::Dlp => {
            let mut out = vec![vec![peaks[0].1, peaks[1].1, tau, tau, peaks[0].0, peaks[1].0, phi0, b]];
            // Two strongest local maxima near the main peak.
            let mut maxima: Vec<usize> = near
                .iter()
                .copied()
                .filter(|&k| k > lo && k + 1 < hi && amp[k] > amp[k - 1] && amp[k] >= amp[k + 1])
                .collect();
            maxima.sort_by(|&a, &b| amp[b].partial_cmp(&amp[a]).unwrap_or(std::cmp::Ordering::Equal));
            if maxima.len() >= 2 && amp[maxima[1]] > lit::<T>(0.05) * amp[j] {
                let (p, q) = (maxima[0].min(maxima[1]), maxima[0].max(maxima[1]));
                let t = lit::<T>(2.0) * tau;
                out.push(vec![amp[p] * norm / t, amp[q] * norm / t, t, t, omega[p], omega[q], phi0, b]);
            }
            // One merged maximum: two lines a quarter width either side.
            let t = lit::<T>(4.0) / width;
            let a = amp[j] * norm / (t * T::SQRT_2());
            let d = width / lit(4.0);
            out.push(vec![a, a, t, t, omega[j] - d, omega[j] + d, phi0, b]);
            out
        }
        ModelKind::Dlpm => {
            // The mirror lines are weak, so φ₁ is tried at three spread values.
            let base = initial_guesses(spectrum, ModelKind::Dlp, init)?;
            let mut out = Vec::with_capacity(3 * base.len());
            for phi1 in [0.0, 2.0 * std::f64::consts::FRAC_PI_3, -2.0 * std::f64::consts::FRAC_PI_3] {
                for p in &base {
                    let mut q = p.clone();
                    q.insert(7, lit(phi1));
                    out.push(q);
                }
            }
            out
        }
        ModelKind::Tlp => {
            let spread = (peaks[2].0 - peaks[0].0) / lit(2.0);
            let dq = init.delta_omega_q.unwrap_or_else(|| {
                if spread > T::zero() && spread < reach / lit(2.0) {
                    spread
                } else {
                    T::one() / tau
                }
            });
            let q = lit::<T>(0.25) * a0;
            vec![vec![q, lit::<T>(2.0) * q, q, tau, tau, tau, omega[j], dq, b]]
        }
    })
}

fn default_window<T: Real>(kind: ModelKind, p: &[T]) -> (T, T) {
    let n = kind.n_peaks();
    let reach = |tau: T| lit::<T>(WINDOW_LINEWIDTHS) / tau;
    let (centers, taus): (Vec<T>, Vec<T>) = match kind {
        ModelKind::Slp => (vec![p[2]], vec![p[1]]),
        ModelKind::Dlp | ModelKind::Dlpm => (vec![p[4], p[5]], vec![p[2], p[3]]),
        ModelKind::Tlp => (vec![p[6] - p[7], p[6], p[6] + p[7]], p[3..6].to_vec()),
    };
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for k in 0..n {
        lo = lo.min(centers[k] - reach(taus[k]));
        hi = hi.max(centers[k] + reach(taus[k]));
    }
    (lo, hi)
}

/// The other DLP solution with the same |Y|. Over a common denominator
/// Y ∝ N(ω)/((Γ + i(ω − ω₁))(Γ + i(ω − ω₂))) with N linear in ω, and |N| on
/// the real axis only fixes the zero of N up to conjugation. Exact for
/// τ₁ = τ₂; otherwise Γ is the mean width and the result is a starting point.
pub fn dlp_partner<T: Real>(p: &[T]) -> Option<Vec<T>> {
    let (a1, a2, tau1, tau2, w1, w2, dphi, b) = (p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
    let dw = w2 - w1;
    if dw == T::zero() {
        return None;
    }
    let i = Complex::new(T::zero(), T::one());
    let g = (T::one() / tau1 + T::one() / tau2) / lit(2.0);
    let a = Complex::new(a1, T::zero());
    let bb = Complex::from_polar(a2, dphi);
    let c1 = (a + bb) * i;
    let c0 = (a + bb) * g - i * (a * w2 + bb * w1);
    if c1.norm() == T::zero() {
        return None;
    }
    let zero = (-c0 / c1).conj();
    let s = -i * c1;
    let a_new = (-i * (s * g + c1 * zero) - s * w1) / dw;
    let b_new = s - a_new;
    let rot = Complex::from_polar(T::one(), -a_new.arg());
    let b_rot = b_new * rot;
    let out = vec![a_new.norm(), b_rot.norm(), tau1, tau2, w1, w2, wrap_angle(b_rot.arg()), b];
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Least-squares fit of `kind` to √(P̂T/2π) within the window.
///
/// Returns [`Error::FitNotConverged`] when the iteration budget runs out; a
/// singular JᵀJ at the optimum is reported through `rank_deficient`.
pub fn fit<T: Real>(spectrum: &Periodogram<T>, kind: ModelKind, init: &FitInit<T>) -> Result<FitReport<T>> {
    let starts = match &init.params {
        Some(p) if p.len() == kind.n_params() => vec![p.clone()],
        Some(p) => {
            return Err(Error::InvalidInput(format!(
                "{kind} takes {} parameters, got {}",
                kind.n_params(),
                p.len()
            )))
        }
        None => initial_guesses(spectrum, kind, init)?,
    };
    if starts.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial parameters"));
    }
    let mut first = starts[0].clone();
    canonicalize(kind, &mut first);
    let window = init.window.unwrap_or_else(|| default_window(kind, &first));
    let (x, y) = spectrum.window(window.0, window.1);
    let np = kind.n_params();
    if x.len() <= np + 1 {
        return Err(Error::InvalidInput(format!(
            "fit window [{}, {}] holds {} points, need more than {}",
            window.0,
            window.1,
            x.len(),
            np + 1
        )));
    }
    let ymax = y.iter().copied().fold(T::zero(), T::max);
    let prob = Problem { kind, x: &x, y: &y };
    let mut best: Option<(T, LmOutcome<T>)> = None;
    let mut last_iter = 0;
    for p0 in starts {
        let lo = lower_bounds(kind, &p0);
        let scale: Vec<T> = kind
            .param_names()
            .iter()
            .zip(&p0)
            .map(|(name, v)| match *name {
                "b" => ymax,
                "delta_phi" | "phi1" => T::one(),
                _ => v.abs().max(T::min_positive_value()),
            })
            .collect();
        let out = levenberg_marquardt(&prob, &p0, &lo, &scale, init.max_iter);
        last_iter = out.iterations;
        if out.converged {
            let rss = prob.rss(&out.p);
            if best.as_ref().is_none_or(|(r, _)| rss < *r) {
                best = Some((rss, out));
            }
        }
    }
    let out = match best {
        Some((_, out)) => out,
        None => return Err(Error::FitNotConverged(last_iter)),
    };
    let mut p = out.p;
    canonicalize(kind, &mut p);

    let (a, _, rss) = prob.normal(&p);
    let n = x.len();
    let dof = n - np;
    let s2 = rss / lit::<T>(dof as f64);
    let mean = y.iter().copied().sum::<T>() / lit::<T>(n as f64);
    let tss: T = y.iter().map(|v| (*v - mean) * (*v - mean)).sum();
    let adj_r2 = T::one() - s2 / (tss / lit::<T>((n - 1) as f64));

    // Covariance through the correlation form of JᵀJ so that the rank test
    // does not depend on parameter units.
    let d: Vec<T> = (0..np).map(|i| a[i][i].sqrt()).collect();
    let corr: Matrix<T> = (0..np)
        .map(|i| (0..np).map(|j| a[i][j] / (d[i] * d[j])).collect())
        .collect();
    let inv = if d.iter().all(|v| *v > T::zero()) {
        spd_inverse(&corr, T::epsilon() * lit(1e3))
    } else {
        None
    };
    let t = lit::<T>(t975(dof));
    let ci: Vec<T> = match &inv {
        Some(c) => (0..np).map(|i| t * (s2 * c[i][i]).sqrt() / d[i]).collect(),
        None => vec![T::nan(); np],
    };
    let names = kind.param_names();
    Ok(FitReport {
        model_kind: kind,
        params: names.iter().map(|s| s.to_string()).zip(p).collect(),
        ci95: names.iter().map(|s| s.to_string()).zip(ci).collect(),
        adj_r2,
        converged: true,
        rank_deficient: inv.is_none(),
        n_iter: out.iterations,
        n_points: n,
        rss,
        window,
    })
}

/// What the fitted positive-frequency peaks mean physically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableContext<T> {
    /// Sign of γB₀; fitted frequencies are |ω|.
    pub precession_sign: T,
    /// G, selects the δθ sign convention in the broken phase.
    pub gradient: T,
    /// Broken phase: "+" is the larger signed frequency. Symmetric phase:
    /// "+" is the faster-decaying mode.
    pub broken: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables<T> {
    /// Signed precession frequencies, rad/s.
    pub omega_plus: T,
    pub omega_minus: T,
    /// Linewidths 1/τ, s⁻¹.
    pub gamma_plus: T,
    pub gamma_minus: T,
    /// A_min/A_max.
    pub eta: T,
    pub delta_theta: T,
}

/// Maps a converged DLP report to (ω±, Γ±, η, δθ).
pub fn extract_observables<T: Real>(report: &FitReport<T>, ctx: &ObservableContext<T>) -> Result<Observables<T>> {
    if !matches!(report.model_kind, ModelKind::Dlp | ModelKind::Dlpm) {
        return Err(Error::InvalidInput(format!("observables need a DLP report, got {}", report.model_kind)));
    }
    if !report.converged {
        return Err(Error::FitNotConverged(report.n_iter));
    }
    let sign = if ctx.precession_sign < T::zero() { -T::one() } else { T::one() };
    let (a1, a2) = (report.get("A1"), report.get("A2"));
    let (g1, g2) = (T::one() / report.get("tau1"), T::one() / report.get("tau2"));
    let (w1, w2) = (sign * report.get("omega1"), sign * report.get("omega2"));
    // θ₂ − θ₁ in the signed-frequency frame.
    let d21 = sign * report.get("delta_phi");
    let plus_is_two = if ctx.broken { w2 > w1 } else { g2 > g1 };
    let (wp, wm, gp, gm, dpm) = if plus_is_two {
        (w2, w1, g2, g1, d21)
    } else {
        (w1, w2, g1, g2, -d21)
    };
    Ok(Observables {
        omega_plus: wp,
        omega_minus: wm,
        gamma_plus: gp,
        gamma_minus: gm,
        eta: a1.min(a2) / a1.max(a2),
        delta_theta: crate::fid::phase_shift_convention(wrap_angle(dpm), ctx.broken, ctx.gradient),
    })
}
