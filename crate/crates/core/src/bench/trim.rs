//! Picking the physical DLP solution by how it moves when the record start
//! is trimmed: the physical branch obeys Δφ̂(t₀) = Δφ + (ω₂ − ω₁)t₀ and
//! Â₂/Â₁(t₀) = (A₂/A₁)e^{−(1/τ₂ − 1/τ₁)t₀}.

use serde::{Deserialize, Serialize};

use super::{fit_series, make_case, match_peaks, search_band, truth_params, truth_vector, BenchSettings, BenchmarkCase, Jitter};
use crate::error::{Error, Result};
use crate::fid::synthesize;
use crate::scalar::{lit, wrap_angle, Real};
use crate::spectral::{dlp_partner, trim_start, FitInit, FitReport};
use crate::stats::{linear_fit, t_quantile, z_quantile};

/// Default trimming times, s.
pub const DEFAULT_TRIM_T0: [f64; 9] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4];
/// Number of evenly spaced Δφ starts used to find the candidate solutions.
pub const MULTISTART: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCheck<T> {
    /// Fit at t₀ = 0 (DLP canonical order).
    pub report: FitReport<T>,
    pub t0: Vec<T>,
    /// Unwrapped Δφ̂(t₀) and its CI half-widths.
    pub delta_phi: Vec<T>,
    pub delta_phi_ci: Vec<T>,
    pub ratio: Vec<T>,
    pub ratio_ci: Vec<T>,
    /// Regression slope of Δφ̂ on t₀.
    pub slope: T,
    pub slope_se: T,
    /// ω̂₂ − ω̂₁ at t₀ = 0.
    pub expected_slope: T,
    /// Allowed |slope − expected_slope|.
    pub slope_tol: T,
    /// Regression slope of ln(Â₂/Â₁) on t₀, its expectation 1/τ̂₁ − 1/τ̂₂
    /// and the allowed difference.
    pub ratio_slope: T,
    pub expected_ratio_slope: T,
    pub ratio_tol: T,
    pub slope_ok: bool,
    pub ratio_ok: bool,
    /// |Δφ̂ − Δφ| at t₀ = 0 after matching peaks to the truth labels.
    pub truth_phase_error: T,
}

impl<T> BranchCheck<T> {
    pub fn passes(&self) -> bool {
        self.slope_ok && self.ratio_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimOutcome<T> {
    pub candidates: Vec<BranchCheck<T>>,
    /// Index of the only candidate passing both tests.
    pub chosen: Option<usize>,
    /// No candidate, or more than one, passed.
    pub ambiguous: bool,
}

impl<T: Real> TrimOutcome<T> {
    /// Index of the candidate nearest the generator's Δφ.
    pub fn physical(&self) -> Option<usize> {
        (0..self.candidates.len()).min_by(|&a, &b| {
            self.candidates[a]
                .truth_phase_error
                .partial_cmp(&self.candidates[b].truth_phase_error)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    /// The chosen candidate is the physical one and every other fails.
    pub fn resolved_correctly(&self) -> bool {
        match (self.chosen, self.physical()) {
            (Some(c), Some(p)) => c == p && !self.ambiguous,
            _ => false,
        }
    }
}

/// The large-gradient case with two well separated solution clusters: the
/// truth family at `gradient` without jitter, and the Δφ whose branch
/// partner lies farthest from it. The noise realization and φ₀ come from
/// `seed`.
pub fn two_cluster_case<T: Real>(gradient: T, settings: &BenchSettings<T>, seed: u64) -> Result<BenchmarkCase<T>> {
    let truth = truth_params(gradient)?;
    let (lo, hi) = if truth.omega1 <= truth.omega2 {
        ((truth.a1, truth.tau1, truth.omega1), (truth.a2, truth.tau2, truth.omega2))
    } else {
        ((truth.a2, truth.tau2, truth.omega2), (truth.a1, truth.tau1, truth.omega1))
    };
    let gap = |d: T| {
        dlp_partner(&[lo.0, hi.0, lo.1, hi.1, lo.2, hi.2, d, T::zero()])
            .map_or(T::zero(), |q| wrap_angle(q[6] - d).abs())
    };
    let n = 72;
    let dphi = (0..n)
        .map(|k| -T::PI() + T::TAU() * lit::<T>(k as f64) / lit::<T>(n as f64))
        .max_by(|a, b| gap(*a).partial_cmp(&gap(*b)).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(T::zero());
    let quiet = BenchSettings { jitter: Jitter::none(), ..*settings };
    let mut case = make_case(&truth, &quiet, seed);
    // Phase Δφ on the higher line relative to the lower one.
    let (i_lo, i_hi) = if case.truth.components[0].omega <= case.truth.components[1].omega { (0, 1) } else { (1, 0) };
    case.truth.components[i_lo].phase = T::zero();
    case.truth.components[i_hi].phase = dphi;
    Ok(case)
}

fn same_solution<T: Real>(a: &FitReport<T>, b: &FitReport<T>) -> bool {
    let ratio = |r: &FitReport<T>| r.get("A2") / r.get("A1");
    let u_phi = a.ci("delta_phi").max(b.ci("delta_phi"));
    let u_ratio = (ratio(a) * (a.ci("A2") / a.get("A2"))).abs().max(T::min_positive_value());
    let tol = T::one();
    wrap_angle(a.get("delta_phi") - b.get("delta_phi")).abs() <= tol * u_phi
        && (ratio(a) - ratio(b)).abs() <= tol * u_ratio
        && (a.get("omega1") - b.get("omega1")).abs() <= tol * a.ci("omega1").max(b.ci("omega1"))
}

/// Refits each distinct t₀ = 0 solution after trimming the record start by
/// every t₀ in `t0_list`, and keeps the one that moves as the physical
/// solution must.
pub fn trim_disambiguate<T: Real>(case: &BenchmarkCase<T>, t0_list: &[T]) -> Result<TrimOutcome<T>> {
    if case.truth.components.len() != 2 {
        return Err(Error::InvalidInput("trimming test needs a two-component truth".into()));
    }
    if t0_list.len() < 3 {
        return Err(Error::InvalidInput("trimming test needs at least three t0 values".into()));
    }
    let series = synthesize(&case.truth, case.seed)?;
    let band = search_band(&case.truth);
    let t2 = case.truth.components.iter().map(|c| c.tau).fold(T::zero(), T::max);
    let truth = truth_vector(&case.truth, T::zero())?;
    let amps = (case.truth.components[0].amplitude, case.truth.components[1].amplitude);

    let mut starts: Vec<T> = (0..MULTISTART)
        .map(|k| -T::PI() + T::TAU() * (lit::<T>(k as f64) + lit(0.5)) / lit::<T>(MULTISTART as f64))
        .collect();
    starts.push(case.phi0);
    let mut found: Vec<FitReport<T>> = starts
        .iter()
        .filter_map(|&phi0| {
            let init = FitInit { phi0: Some(phi0), search_band: Some(band), ..FitInit::default() };
            fit_series(&series, t2, case.oversample, &init).ok()
        })
        .collect();
    found.sort_by(|a, b| a.rss.partial_cmp(&b.rss).unwrap_or(std::cmp::Ordering::Equal));
    // The branch partner of the best fit, in case no start reached it.
    if let Some(q) = found.first().and_then(|r| dlp_partner(&r.values())) {
        let init = FitInit { search_band: Some(band), ..FitInit::from_params(q) };
        if let Ok(r) = fit_series(&series, t2, case.oversample, &init) {
            found.push(r);
        }
    }
    let mut distinct: Vec<FitReport<T>> = Vec::new();
    for r in found {
        if !distinct.iter().any(|d| same_solution(d, &r)) {
            distinct.push(r);
        }
    }

    let candidates: Vec<BranchCheck<T>> = distinct
        .into_iter()
        .map(|r| check_branch(&series, &r, t0_list, case.oversample, &truth, amps))
        .collect::<Result<_>>()?;
    let passing: Vec<usize> = (0..candidates.len()).filter(|&k| candidates[k].passes()).collect();
    let chosen = (passing.len() == 1).then(|| passing[0]);
    Ok(TrimOutcome {
        ambiguous: chosen.is_none(),
        candidates,
        chosen,
    })
}

/// Two-sided level of the slope tests. Success means accepting the physical
/// branch and rejecting the other, so a 95% test would by itself spend the
/// whole 5% failure budget; 99% keeps the tolerance well under the branch
/// separation.
pub const TRIM_TEST_LEVEL: f64 = 0.99;

/// Regression slope test against `expected`. The tolerance adds the
/// regression CI, the CI of the expectation, and the slope the end-point
/// CIs alone could fake; fits at different t₀ share one noise record, so
/// their errors are correlated and the regression CI alone is too narrow.
/// `u` and `expected_ci` are 95% half-widths and are rescaled to
/// [`TRIM_TEST_LEVEL`]. A tolerance above `resolution` cannot tell the
/// branches apart and fails.
fn slope_test<T: Real>(t: &[T], y: &[T], u: &[T], expected: T, expected_ci: T, resolution: T) -> Option<(T, T, T, bool)> {
    let f = linear_fit(t, y)?;
    let n = t.len();
    let span = t[n - 1] - t[0];
    let upper = 0.5 + TRIM_TEST_LEVEL / 2.0;
    let tq = lit::<T>(t_quantile(upper, n - 2));
    let widen = lit::<T>(z_quantile(upper) / z_quantile(0.975));
    let tol = tq * f.slope_se + widen * (expected_ci + (u[0] + u[n - 1]) / span);
    let ok = tol <= resolution && (f.slope - expected).abs() <= tol;
    Some((f.slope, f.slope_se, tol, ok))
}

fn check_branch<T: Real>(
    series: &crate::fid::TimeSeries<T>,
    r0: &FitReport<T>,
    t0_list: &[T],
    oversample: T,
    truth: &[T; 6],
    amps: (T, T),
) -> Result<BranchCheck<T>> {
    let p = r0.values();
    let (a1, a2, tau1, tau2, w1, w2, dphi, b) = (p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]);
    let dw = w2 - w1;
    let t2 = tau1.max(tau2);
    let mut ts = Vec::new();
    let mut phases = Vec::new();
    let mut phase_ci = Vec::new();
    let mut ratios = Vec::new();
    let mut ratio_ci = Vec::new();
    let mut failed = false;
    for &t0 in t0_list {
        let (s, t0) = trim_start(series, t0)?;
        let init = FitInit::from_params(vec![
            a1 * (-t0 / tau1).exp(),
            a2 * (-t0 / tau2).exp(),
            tau1,
            tau2,
            w1,
            w2,
            wrap_angle(dphi + dw * t0),
            b,
        ]);
        match fit_series(&s, t2, oversample, &init) {
            Ok(r) => {
                let ratio = r.get("A2") / r.get("A1");
                ts.push(t0);
                phases.push(r.get("delta_phi"));
                phase_ci.push(r.ci("delta_phi"));
                ratio_ci.push(ratio * ((r.ci("A1") / r.get("A1")).powi(2) + (r.ci("A2") / r.get("A2")).powi(2)).sqrt());
                ratios.push(ratio);
            }
            Err(_) => failed = true,
        }
    }
    // Sequential unwrap: adjacent t₀ steps move Δφ by far less than π.
    for k in 1..phases.len() {
        let d = wrap_angle(phases[k] - phases[k - 1]);
        phases[k] = phases[k - 1] + d;
    }
    let nan = T::nan();
    let expected_ci = (r0.ci("omega1").powi(2) + r0.ci("omega2").powi(2)).sqrt();
    // The phase slope must be pinned to better than half the splitting, the
    // scale on which the branches differ. The ratio test only confirms.
    let resolution = dw.abs() / lit(2.0);
    let (slope, slope_se, slope_tol, slope_ok) =
        slope_test(&ts, &phases, &phase_ci, dw, expected_ci, resolution).unwrap_or((nan, nan, nan, false));
    let log_ratio: Vec<T> = ratios.iter().map(|r| r.ln()).collect();
    let log_ci: Vec<T> = ratio_ci.iter().zip(&ratios).map(|(u, r)| *u / *r).collect();
    let expected_ratio = T::one() / tau1 - T::one() / tau2;
    let expected_ratio_ci =
        ((r0.ci("tau1") / (tau1 * tau1)).powi(2) + (r0.ci("tau2") / (tau2 * tau2)).powi(2)).sqrt();
    let (ratio_slope, _, ratio_tol, ratio_ok) = slope_test(&ts, &log_ratio, &log_ci, expected_ratio, expected_ratio_ci, T::infinity())
        .unwrap_or((nan, nan, nan, false));
    let swap = match_peaks(r0, truth, amps);
    let (est, _) = super::estimate_vector(r0, swap);
    Ok(BranchCheck {
        report: r0.clone(),
        t0: ts,
        delta_phi: phases,
        delta_phi_ci: phase_ci,
        ratio: ratios,
        ratio_ci,
        slope,
        slope_se,
        expected_slope: dw,
        slope_tol,
        ratio_slope,
        expected_ratio_slope: expected_ratio,
        ratio_tol,
        slope_ok: slope_ok && !failed,
        ratio_ok: ratio_ok && !failed,
        truth_phase_error: wrap_angle(est[5] - truth[5]).abs(),
    })
}
