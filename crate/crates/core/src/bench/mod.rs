//! Monte-Carlo benchmark of the DLP fitting chain: synthesize → trim →
//! periodogram → fit, against parameter truths regenerated from the exact
//! eigenmodes.

mod phi0;
mod trim;

pub use phi0::{phi0_sweep, Phi0Row, Phi0Sweep};
pub use trim::{trim_disambiguate, two_cluster_case, BranchCheck, TrimOutcome, DEFAULT_TRIM_T0, TRIM_TEST_LEVEL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::ep_location;
use crate::error::{Error, Result};
use crate::fid::{exact_mode_amplitudes, synthesize, FidComponent, FidModel};
use crate::model::PhysicalConfig;
use crate::scalar::{lit, wrap_angle, Real};
use crate::spectral::{fit, periodogram, trim_policy, trim_start, FitInit, FitReport, ModelKind};
use crate::stats::{coverage_quantile, mean, stable_sum, std_dev};

/// Probe position of the benchmark family, cm.
pub const BENCH_Z_P_CM: f64 = -0.056;
/// A₁ at zero gradient; sets the amplitude scale of the family.
pub const BENCH_A1_AT_ZERO: f64 = 0.2;
/// Relative half-width around g′₁ inside which the truth is frozen at the
/// band edge (mode amplitudes diverge at the EP itself).
pub const EP_GUARD: f64 = 5e-3;
/// Failure rate above which a benchmark row is flagged.
pub const FAILURE_ALARM: f64 = 0.05;

/// The six benchmarked quantities, in report order.
pub const PARAMS: [&str; 6] = ["omega1", "omega2", "tau1", "tau2", "A2/A1", "delta_phi"];

/// Parameters of y = A₁e^{−t/τ₁}sin(ω₁t) + A₂e^{−t/τ₂}sin(ω₂t + Δφ) at one
/// gradient, before jitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthParams<T> {
    /// nT/cm.
    pub gradient: T,
    pub a1: T,
    pub a2: T,
    pub tau1: T,
    pub tau2: T,
    /// |ω|, rad/s.
    pub omega1: T,
    pub omega2: T,
}

/// Truth at gradient G from modes 0 (k = 1) and 1 (k = 2) of the exact
/// solution at the benchmark probe position.
pub fn truth_params<T: Real>(gradient: T) -> Result<TruthParams<T>> {
    let base = PhysicalConfig::<T>::xe129();
    let z_p = lit::<T>(BENCH_Z_P_CM);
    let (gp1, _) = ep_location::<T>(1)?;
    let mut cfg = base.with_gradient(gradient);
    let gp = cfg.g_prime();
    let guard = lit::<T>(EP_GUARD) * gp1;
    if (gp.abs() - gp1).abs() < guard {
        let edge = if gp.abs() < gp1 { gp1 - guard } else { gp1 + guard };
        let signed = if gp < T::zero() { -edge } else { edge };
        cfg = base.with_gradient(base.gradient_for_g_prime(signed));
    }
    let scale = lit::<T>(BENCH_A1_AT_ZERO) / exact_mode_amplitudes(&base.with_gradient(T::zero()), z_p, 1)?[0].amplitude;
    let m = exact_mode_amplitudes(&cfg, z_p, 1)?;
    Ok(TruthParams {
        gradient,
        a1: m[0].amplitude * scale,
        a2: m[1].amplitude * scale,
        tau1: T::one() / m[0].eigenvalue.decay,
        tau2: T::one() / m[1].eigenvalue.decay,
        omega1: m[0].eigenvalue.frequency.abs(),
        omega2: m[1].eigenvalue.frequency.abs(),
    })
}

/// Per-run truth fluctuation: Gaussian relative on A and τ, Gaussian
/// absolute (Hz) on frequencies; Δφ is drawn uniform on (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jitter<T> {
    pub amplitude_rel: T,
    pub tau_rel: T,
    pub frequency_hz: T,
}

impl<T: Real> Jitter<T> {
    pub fn none() -> Self {
        Self { amplitude_rel: T::zero(), tau_rel: T::zero(), frequency_hz: T::zero() }
    }
}

impl<T: Real> Default for Jitter<T> {
    fn default() -> Self {
        Self {
            amplitude_rel: lit(0.01),
            tau_rel: lit(0.01),
            frequency_hz: lit(0.01),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings<T> {
    /// Hz.
    pub sample_rate: T,
    pub noise_sigma: T,
    pub oversample: T,
    /// Synthesized record length in units of the slower decay time; the
    /// trim policy then cuts it at 12 T₂.
    pub record_t2: T,
    pub jitter: Jitter<T>,
}

impl<T: Real> Default for BenchSettings<T> {
    fn default() -> Self {
        Self {
            sample_rate: lit(2000.0),
            noise_sigma: lit(0.01),
            oversample: lit(10.0),
            record_t2: lit(14.0),
            jitter: Jitter::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCase<T> {
    pub truth: FidModel<T>,
    pub seed: u64,
    /// Δφ starting value.
    pub phi0: T,
    /// Record start trimmed away before fitting, s.
    pub trim_t0: T,
    pub oversample: T,
}

/// splitmix64 mixing of (seed, a, b) into an independent stream seed.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform_angle<R: Rng>(rng: &mut R) -> f64 {
    // (−π, π]
    std::f64::consts::PI - rng.random::<f64>() * std::f64::consts::TAU
}

/// A jittered case at one gradient; all randomness comes from `seed`.
pub fn make_case<T: Real>(truth: &TruthParams<T>, settings: &BenchSettings<T>, seed: u64) -> BenchmarkCase<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = || lit::<T>(StandardNormal.sample(&mut rng));
    let j = settings.jitter;
    let two_pi = T::TAU();
    let a1 = truth.a1 * (T::one() + j.amplitude_rel * n());
    let a2 = truth.a2 * (T::one() + j.amplitude_rel * n());
    let tau1 = truth.tau1 * (T::one() + j.tau_rel * n());
    let tau2 = truth.tau2 * (T::one() + j.tau_rel * n());
    let w1 = truth.omega1 + two_pi * j.frequency_hz * n();
    let w2 = truth.omega2 + two_pi * j.frequency_hz * n();
    let dphi = lit::<T>(uniform_angle(&mut rng));
    let phi0 = lit::<T>(uniform_angle(&mut rng));
    let noise_seed = rng.random::<u64>();
    BenchmarkCase {
        truth: FidModel {
            components: vec![
                FidComponent { amplitude: a1, tau: tau1, omega: w1, phase: T::zero() },
                FidComponent { amplitude: a2, tau: tau2, omega: w2, phase: dphi },
            ],
            noise_sigma: settings.noise_sigma,
            sample_rate: settings.sample_rate,
            duration: settings.record_t2 * tau1.max(tau2),
        },
        seed: noise_seed,
        phi0,
        trim_t0: T::zero(),
        oversample: settings.oversample,
    }
}

/// Truth and estimate of the six benchmarked quantities, with fitted peaks
/// matched to the generator's k = 1, 2 labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome<T> {
    pub truth: [T; 6],
    pub estimate: [T; 6],
    /// U_χ, 95% half-widths.
    pub ci95: [T; 6],
    /// E_χ = χ̂ − χ (Δφ wrapped).
    pub errors: [T; 6],
    /// R_χ = |E_χ|/U_χ.
    pub ratios: [T; 6],
    /// The fitted peak order was swapped to match the truth labels.
    pub swapped: bool,
    pub report: FitReport<T>,
}

/// (ω₁, ω₂, τ₁, τ₂, A₂/A₁, Δφ) of a two-component model observed from t₀.
pub(crate) fn truth_vector<T: Real>(model: &FidModel<T>, t0: T) -> Result<[T; 6]> {
    if model.components.len() != 2 {
        return Err(Error::InvalidInput("benchmark truth needs exactly two components".into()));
    }
    let c: Vec<FidComponent<T>> = model.components.iter().map(|c| c.shifted(t0).canonical()).collect();
    Ok([
        c[0].omega,
        c[1].omega,
        c[0].tau,
        c[1].tau,
        c[1].amplitude / c[0].amplitude,
        wrap_angle(c[1].phase - c[0].phase),
    ])
}

/// Estimate vector in fit order, and its half-widths.
pub(crate) fn estimate_vector<T: Real>(r: &FitReport<T>, swap: bool) -> ([T; 6], [T; 6]) {
    let (i, j) = if swap { ("2", "1") } else { ("1", "2") };
    let g = |p: &str, k: &str| r.get(&format!("{p}{k}"));
    let u = |p: &str, k: &str| r.ci(&format!("{p}{k}"));
    let ratio = g("A", j) / g("A", i);
    let u_ratio = ratio * ((u("A", i) / g("A", i)).powi(2) + (u("A", j) / g("A", j)).powi(2)).sqrt();
    let dphi = if swap { -r.get("delta_phi") } else { r.get("delta_phi") };
    (
        [g("omega", i), g("omega", j), g("tau", i), g("tau", j), ratio, wrap_angle(dphi)],
        [u("omega", i), u("omega", j), u("tau", i), u("tau", j), u_ratio, r.ci("delta_phi")],
    )
}

/// Chooses the peak labelling closest to the truth, distances measured in
/// linewidths for ω and relatively for τ and A.
pub(crate) fn match_peaks<T: Real>(r: &FitReport<T>, truth: &[T; 6], amps: (T, T)) -> bool {
    let cost = |swap: bool| {
        let (i, j) = if swap { ("2", "1") } else { ("1", "2") };
        let g = |p: &str, k: &str| r.get(&format!("{p}{k}"));
        ((g("omega", i) - truth[0]) * truth[2]).abs()
            + ((g("omega", j) - truth[1]) * truth[3]).abs()
            + ((g("tau", i) - truth[2]) / truth[2]).abs()
            + ((g("tau", j) - truth[3]) / truth[3]).abs()
            + ((g("A", i) - amps.0) / amps.0).abs()
            + ((g("A", j) - amps.1) / amps.1).abs()
    };
    cost(true) < cost(false)
}

pub(crate) fn outcome_from<T: Real>(report: FitReport<T>, truth: [T; 6], amps: (T, T)) -> CaseOutcome<T> {
    let swapped = match_peaks(&report, &truth, amps);
    let (estimate, ci95) = estimate_vector(&report, swapped);
    let mut errors = [T::zero(); 6];
    let mut ratios = [T::zero(); 6];
    for k in 0..6 {
        errors[k] = estimate[k] - truth[k];
        if k == 5 {
            errors[k] = wrap_angle(errors[k]);
        }
        ratios[k] = errors[k].abs() / ci95[k];
    }
    CaseOutcome { truth, estimate, ci95, errors, ratios, swapped, report }
}

pub(crate) fn fit_series<T: Real>(
    series: &crate::fid::TimeSeries<T>,
    t2: T,
    oversample: T,
    init: &FitInit<T>,
) -> Result<FitReport<T>> {
    let trimmed = trim_policy(series, t2)?;
    let pg = periodogram(&trimmed.series, oversample)?;
    fit(&pg, ModelKind::Dlp, init)
}

/// Search band: truth frequencies ± 2 Hz.
pub(crate) fn search_band<T: Real>(model: &FidModel<T>) -> (T, T) {
    let w: Vec<T> = model.components.iter().map(|c| c.omega.abs()).collect();
    let pad = T::TAU() * lit::<T>(2.0);
    let lo = w.iter().copied().fold(T::infinity(), T::min) - pad;
    let hi = w.iter().copied().fold(T::neg_infinity(), T::max) + pad;
    (lo, hi)
}

/// synthesize → trim start → trim at 12 T₂ → periodogram → DLP fit → errors.
pub fn run_case<T: Real>(case: &BenchmarkCase<T>) -> Result<CaseOutcome<T>> {
    case.truth.validate()?;
    let series = synthesize(&case.truth, case.seed)?;
    let (series, t0) = trim_start(&series, case.trim_t0)?;
    let truth = truth_vector(&case.truth, t0)?;
    let shifted: Vec<FidComponent<T>> = case.truth.components.iter().map(|c| c.shifted(t0)).collect();
    let t2 = shifted.iter().map(|c| c.tau).fold(T::zero(), T::max);
    let init = FitInit {
        phi0: Some(case.phi0),
        search_band: Some(search_band(&case.truth)),
        ..FitInit::default()
    };
    let report = fit_series(&series, t2, case.oversample, &init)?;
    Ok(outcome_from(report, truth, (shifted[0].amplitude.abs(), shifted[1].amplitude.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamStats<T> {
    /// ⟨E_χ⟩.
    pub mean_error: T,
    /// σ_χ with N − 1 normalization.
    pub sigma: T,
    /// F_χ: 95th percentile of R_χ.
    pub u95: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkStats<T> {
    pub gradient: T,
    pub truth: TruthParams<T>,
    /// Keyed by [`PARAMS`].
    pub params: indexmap::IndexMap<String, ParamStats<T>>,
    pub n_runs: usize,
    pub n_failed: usize,
    pub failure_rate: f64,
    pub failure_alarm: bool,
    pub settings: BenchSettings<T>,
}

impl<T: Real> BenchmarkStats<T> {
    pub fn param(&self, name: &str) -> ParamStats<T> {
        self.params[name]
    }
}

/// Aggregates outcomes; failed runs only count toward the failure rate.
pub fn aggregate<T: Real>(
    truth: TruthParams<T>,
    settings: BenchSettings<T>,
    outcomes: &[Result<CaseOutcome<T>>],
    quantile: f64,
) -> BenchmarkStats<T> {
    let ok: Vec<&CaseOutcome<T>> = outcomes.iter().filter_map(|r| r.as_ref().ok()).collect();
    let n_failed = outcomes.len() - ok.len();
    let mut params = indexmap::IndexMap::new();
    for (k, name) in PARAMS.iter().enumerate() {
        let e: Vec<T> = ok.iter().map(|o| o.errors[k]).collect();
        let r: Vec<T> = ok.iter().map(|o| o.ratios[k]).filter(|v| !v.is_nan()).collect();
        params.insert(
            name.to_string(),
            ParamStats {
                mean_error: if e.is_empty() { T::nan() } else { mean(&e) },
                sigma: std_dev(&e),
                u95: coverage_quantile(&r, quantile),
            },
        );
    }
    let failure_rate = if outcomes.is_empty() { 0.0 } else { n_failed as f64 / outcomes.len() as f64 };
    BenchmarkStats {
        gradient: truth.gradient,
        truth,
        params,
        n_runs: ok.len(),
        n_failed,
        failure_rate,
        failure_alarm: failure_rate > FAILURE_ALARM,
        settings,
    }
}

/// Runs `n_per_g` jittered cases at each gradient in parallel. Case seeds
/// derive from (seed0, gradient index, run index), so the result does not
/// depend on scheduling.
pub fn run_monte_carlo<T: Real>(
    g_list: &[T],
    n_per_g: usize,
    seed0: u64,
    settings: &BenchSettings<T>,
) -> Result<Vec<(BenchmarkStats<T>, Vec<Result<CaseOutcome<T>>>)>> {
    g_list
        .iter()
        .enumerate()
        .map(|(gi, &g)| {
            let truth = truth_params(g)?;
            let outcomes: Vec<Result<CaseOutcome<T>>> = (0..n_per_g)
                .into_par_iter()
                .map(|i| run_case(&make_case(&truth, settings, derive_seed(seed0, gi as u64, i as u64))))
                .collect();
            Ok((aggregate(truth, *settings, &outcomes, 0.95), outcomes))
        })
        .collect()
}

/// Sum of errors, used to check order independence of aggregation.
pub fn error_checksum<T: Real>(outcomes: &[Result<CaseOutcome<T>>]) -> T {
    stable_sum(outcomes.iter().filter_map(|o| o.as_ref().ok()).flat_map(|o| o.errors))
}
