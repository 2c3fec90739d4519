use serde::Serialize;
use torrey_lab::bench::derive_seed;
use torrey_lab::comag::{omega_rot_2w, omega_rot_3w, FrequencyTriple, ThreeOmegaSolution};
use torrey_lab::eigen::{solve_spectrum, Phase};
use torrey_lab::fid::{synthesize, FidModel};
use torrey_lab::model::PhysicalConfig;
use torrey_lab::spectral::{extract_observables, fit, periodogram, FitInit, FitReport, ModelKind, ObservableContext, Observables};

use super::comag::structured_hz;
use super::fid::{series_table, signal_model};
use super::hz;
use crate::config::{Estimator, Isotope};
use crate::failure::{CliResult, Failure};
use crate::output::Ctx;

/// Peak search half-band around the Larmor frequency, Hz.
pub const SEARCH_HALF_BAND_HZ: f64 = 5.0;

#[derive(Debug, Serialize)]
struct SpeciesReport {
    isotope: Isotope,
    gradient: f64,
    g_prime: f64,
    phase: Phase,
    model: ModelKind,
    fit_file: String,
    /// Fitted peak frequencies, Hz, signed by the precession direction.
    frequencies_hz: Vec<f64>,
    truth_frequencies_hz: Vec<f64>,
    converged: bool,
    observables: Option<Observables<f64>>,
}

#[derive(Debug, Serialize)]
struct PipelineReport {
    seed: u64,
    xe129: SpeciesReport,
    xe131: SpeciesReport,
    /// (ω₁₂₉, Δω₁₂₉, ω₁₃₁)/(2π) from the fits.
    triple_hz: FrequencyTriple<f64>,
    truth_triple_hz: FrequencyTriple<f64>,
    omega_rot_2w_hz: Option<f64>,
    omega_rot_3w: Option<ThreeOmegaSolution<f64>>,
    estimator_units: &'static str,
}

struct Species {
    report: SpeciesReport,
    fit: FitReport<f64>,
    /// Signed mean precession frequency and |ω₊| − |ω₋|, rad/s.
    mean: f64,
    split: f64,
    truth_mean: f64,
    truth_split: f64,
}

fn signed(sign: f64, w: f64) -> f64 {
    if sign < 0.0 { -w } else { w }
}

/// Mean and |ω₊| − |ω₋| of a set of signed frequencies; ω₊ is the larger.
fn mean_split(w: &[f64]) -> (f64, f64) {
    match w {
        [a] => (*a, 0.0),
        [a, b] => {
            let (p, m) = if a > b { (a, b) } else { (b, a) };
            ((a + b) / 2.0, p.abs() - m.abs())
        }
        _ => (f64::NAN, f64::NAN),
    }
}

fn species(ctx: &Ctx, isotope: Isotope, cfg: &PhysicalConfig<f64>, index: u64, two_peak: ModelKind) -> CliResult<Species> {
    let name = match isotope {
        Isotope::Xe129 => "129",
        Isotope::Xe131 => "131",
    };
    let synth = |e: torrey_lab::Error| Failure::from(e).stage(&format!("synth {name}"));
    let model: FidModel<f64> = signal_model(cfg, &ctx.config.probe, &ctx.config.acquisition).map_err(|e| e.stage("synth"))?;
    let seed = derive_seed(ctx.seed, index, 0);
    ctx.note_seed(seed);
    let series = synthesize(&model, seed).map_err(synth)?;
    ctx.emit_csv(&format!("synth_{name}.csv"), &series_table(&series))?;

    let g_prime = cfg.g_prime();
    let phase = solve_spectrum(g_prime, 1).map_err(synth)?.phase;
    let broken = phase != Phase::Symmetric;
    let kind = if broken { two_peak } else { ModelKind::Slp };
    let larmor = cfg.larmor().abs();
    let band = std::f64::consts::TAU * SEARCH_HALF_BAND_HZ;
    let init = FitInit {
        phi0: ctx.config.fit.phi0,
        search_band: Some((larmor - band, larmor + band)),
        max_iter: ctx.config.fit.max_iter,
        ..FitInit::default()
    };
    let fitted = periodogram(&series, ctx.config.fit.oversample)
        .and_then(|pg| fit(&pg, kind, &init))
        .map_err(|e| Failure::from(e).stage(&format!("fit {name}")))?;
    let fit_file = format!("fit_{name}.json");
    ctx.emit_json(&fit_file, &fitted)?;

    let sign = cfg.larmor().signum();
    let observables = if broken && fitted.converged {
        let octx = ObservableContext { precession_sign: sign, gradient: cfg.gradient, broken };
        Some(extract_observables(&fitted, &octx).map_err(|e| Failure::from(e).stage(&format!("observables {name}")))?)
    } else {
        None
    };
    let freqs: Vec<f64> = (1..=kind.n_peaks())
        .map(|k| signed(sign, fitted.get(&format!("omega{k}"))))
        .collect();
    let mut truth: Vec<f64> = model.components.iter().map(|c| c.omega).collect();
    if !broken {
        truth.truncate(1);
    }
    let (mean, split) = mean_split(&freqs);
    let (truth_mean, truth_split) = mean_split(&truth);
    Ok(Species {
        report: SpeciesReport {
            isotope,
            gradient: cfg.gradient,
            g_prime,
            phase,
            model: kind,
            fit_file,
            frequencies_hz: freqs.iter().map(|w| hz(*w)).collect(),
            truth_frequencies_hz: truth.iter().map(|w| hz(*w)).collect(),
            converged: fitted.converged,
            observables,
        },
        fit: fitted,
        mean,
        split,
        truth_mean,
        truth_split,
    })
}

pub fn run(ctx: &Ctx) -> CliResult<()> {
    ctx.require_files("pipeline")?;
    let p = &ctx.config.physical;
    let two_peak = ctx.config.fit_model()?;
    let a = species(ctx, Isotope::Xe129, &p.species(Isotope::Xe129), 0, two_peak)?;
    let b = species(ctx, Isotope::Xe131, &p.species(Isotope::Xe131), 1, two_peak)?;

    let triple = FrequencyTriple { omega_129: hz(a.mean), delta_omega_129: hz(a.split), omega_131: hz(b.mean) };
    let truth = FrequencyTriple {
        omega_129: hz(a.truth_mean),
        delta_omega_129: hz(a.truth_split),
        omega_131: hz(b.truth_mean),
    };
    let est = ctx.config.comag.estimator;
    let w2 = matches!(est, Estimator::TwoOmega | Estimator::Both)
        .then(|| omega_rot_2w(triple.omega_129, triple.omega_131, p.ratio));
    let w3 = if matches!(est, Estimator::ThreeOmega | Estimator::Both) {
        let cal = structured_hz(ctx).map_err(|e| e.stage("comag"))?;
        Some(omega_rot_3w(triple.delta_from(&truth), &cal).map_err(|e| Failure::from(e).stage("comag"))?)
    } else {
        None
    };
    let converged = a.fit.converged && b.fit.converged;
    let report = PipelineReport {
        seed: ctx.seed,
        xe129: a.report,
        xe131: b.report,
        triple_hz: triple,
        truth_triple_hz: truth,
        omega_rot_2w_hz: w2,
        omega_rot_3w: w3,
        estimator_units: "Hz, nT, mW; 3w increments are measured minus generator frequencies",
    };
    ctx.emit_json("report.json", &report)?;
    if converged {
        Ok(())
    } else {
        Err(Failure::no_convergence("a spectral fit did not converge; see report.json"))
    }
}
