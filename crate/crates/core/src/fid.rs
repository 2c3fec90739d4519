//! Free-induction-decay signals: the general decaying-sinusoid model, the
//! two-mode broken-phase solution at a probe position, the exact-mode
//! expansion and the ¹³¹Xe quadrupole triplet.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eigen::{eigenmode, solve_spectrum, two_mode, TwoModeSystem, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::model::{physical_eigenvalue, to_dimensionless, ComplexEigenvalue, PhysicalConfig};
use crate::scalar::{lit, wrap_angle, Real};

/// A_k e^{−t/τ_k} sin(ω_k t + φ_k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidComponent<T> {
    pub amplitude: T,
    pub tau: T,
    pub omega: T,
    pub phase: T,
}

impl<T: Real> FidComponent<T> {
    pub fn eval(&self, t: T) -> T {
        self.amplitude * (-t / self.tau).exp() * (self.omega * t + self.phase).sin()
    }

    /// Same signal written with A ≥ 0, ω ≥ 0 and φ ∈ (−π, π].
    pub fn canonical(self) -> Self {
        let mut c = self;
        if c.omega < T::zero() {
            c.omega = -c.omega;
            c.phase = T::PI() - c.phase;
        }
        if c.amplitude < T::zero() {
            c.amplitude = -c.amplitude;
            c.phase += T::PI();
        }
        c.phase = wrap_angle(c.phase);
        c
    }

    /// The component observed from a time origin shifted by `t0`.
    pub fn shifted(self, t0: T) -> Self {
        Self {
            amplitude: self.amplitude * (-t0 / self.tau).exp(),
            phase: wrap_angle(self.phase + self.omega * t0),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidModel<T> {
    pub components: Vec<FidComponent<T>>,
    pub noise_sigma: T,
    /// Hz.
    pub sample_rate: T,
    /// s.
    pub duration: T,
}

/// Samples (t_n, y_n). Time stamps need not be uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries<T> {
    pub t: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Real> TimeSeries<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sample interval if the stamps are uniform to 1e-6 relative.
    pub fn uniform_step(&self) -> Option<T> {
        if self.t.len() < 2 {
            return None;
        }
        let n = self.t.len();
        let dt = (self.t[n - 1] - self.t[0]) / lit::<T>((n - 1) as f64);
        let tol = dt * lit(1e-6);
        let uniform = self
            .t
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= tol);
        uniform.then_some(dt)
    }
}

impl<T: Real> FidModel<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > T::zero()) || !(self.duration > T::zero()) {
            return Err(Error::InvalidInput("sample_rate and duration must be positive".into()));
        }
        if !(self.noise_sigma >= T::zero()) {
            return Err(Error::InvalidInput("noise_sigma must be >= 0".into()));
        }
        for c in &self.components {
            if !(c.tau > T::zero()) || !c.amplitude.is_finite() || !c.omega.is_finite() || !c.phase.is_finite() {
                return Err(Error::InvalidInput(format!("bad FID component {c:?}")));
            }
        }
        Ok(())
    }

    /// Checks the conditions a signal meant for spectral fitting must meet:
    /// duration ≥ 5·max τ and 2π·f_s > 4·max|ω|.
    pub fn validate_for_fitting(&self) -> Result<()> {
        self.validate()?;
        let tau = self.components.iter().map(|c| c.tau).fold(T::zero(), T::max);
        let omega = self.components.iter().map(|c| c.omega.abs()).fold(T::zero(), T::max);
        if self.duration < lit::<T>(5.0) * tau {
            return Err(Error::InvalidInput(format!(
                "duration {} is shorter than 5 decay times ({})",
                self.duration, tau
            )));
        }
        if self.sample_rate * T::TAU() <= lit::<T>(4.0) * omega {
            return Err(Error::InvalidInput("sample rate too low for the highest frequency".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<T> {
        let n = (self.duration * self.sample_rate).floor().to_usize().unwrap_or(0);
        (0..n).map(|i| lit::<T>(i as f64) / self.sample_rate).collect()
    }

    /// Noiseless model value.
    pub fn eval(&self, t: T) -> T {
        self.components.iter().map(|c| c.eval(t)).sum()
    }

    /// Σ A_k e^{−t/τ_k}.
    pub fn envelope(&self, t: T) -> T {
        self.components
            .iter()
            .map(|c| c.amplitude.abs() * (-t / c.tau).exp())
            .sum()
    }
}

/// Samples the model on its uniform grid and adds i.i.d. Gaussian noise.
/// Output is a pure function of (model, seed).
pub fn synthesize<T: Real>(model: &FidModel<T>, seed: u64) -> Result<TimeSeries<T>> {
    model.validate()?;
    let t = model.times();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = t
        .iter()
        .map(|&ti| {
            let n: f64 = StandardNormal.sample(&mut rng);
            model.eval(ti) + model.noise_sigma * lit::<T>(n)
        })
        .collect();
    Ok(TimeSeries { t, y })
}

/// Sample rate, record length and noise level of an acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Acquisition<T> {
    pub sample_rate: T,
    pub duration: T,
    pub noise_sigma: T,
}

/// Three lines at ω₀ − Δ_Q, ω₀, ω₀ + Δ_Q with zero phases.
pub fn quadrupole_triplet<T: Real>(
    center_omega: T,
    delta_q: T,
    amplitudes: [T; 3],
    taus: [T; 3],
    acq: Acquisition<T>,
) -> Result<FidModel<T>> {
    if !(delta_q >= T::zero()) {
        return Err(Error::InvalidInput("quadrupole splitting must be >= 0".into()));
    }
    let omegas = [center_omega - delta_q, center_omega, center_omega + delta_q];
    let model = FidModel {
        components: (0..3)
            .map(|k| FidComponent {
                amplitude: amplitudes[k],
                tau: taus[k],
                omega: omegas[k],
                phase: T::zero(),
            })
            .collect(),
        noise_sigma: acq.noise_sigma,
        sample_rate: acq.sample_rate,
        duration: acq.duration,
    };
    model.validate()?;
    Ok(model)
}

/// Probe position z_p (cm) and time-origin offset t₀ (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeGeometry<T> {
    pub z_p: T,
    pub t0: T,
}

impl<T: Real> ProbeGeometry<T> {
    pub fn validate(&self, length: T) -> Result<()> {
        if !self.z_p.is_finite() || !self.t0.is_finite() || self.z_p.abs() >= length / lit(2.0) {
            return Err(Error::InvalidInput(format!(
                "probe position {} outside the cell",
                self.z_p
            )));
        }
        Ok(())
    }
}

fn i_sin<T: Real>(z_p: T, length: T) -> T {
    (T::PI() * z_p / length).sin()
}

/// a± e^{iβ±} = [1/√2 ∓ cos φ·I] + i sin φ·I with I = sin(πz_p/L).
fn nu_at<T: Real>(sin_phi: T, cos_phi: T, z_p: T, length: T) -> (Complex<T>, Complex<T>) {
    let i = i_sin(z_p, length);
    let r = T::FRAC_1_SQRT_2();
    (
        Complex::new(r - cos_phi * i, sin_phi * i),
        Complex::new(r + cos_phi * i, sin_phi * i),
    )
}

/// a₊/a₋ = √((1 − 2√2 cos φ I + 2I²)/(1 + 2√2 cos φ I + 2I²)).
pub fn amplitude_ratio<T: Real>(g: T, z_p: T, length: T) -> Result<T> {
    let sys = TwoModeSystem::new(T::one(), g);
    let (_, c) = sys.mixing()?;
    let i = i_sin(z_p, length);
    let k = lit::<T>(2.0 * 2f64.sqrt()) * c * i;
    let two_i2 = lit::<T>(2.0) * i * i;
    Ok(((T::one() - k + two_i2) / (T::one() + k + two_i2)).sqrt())
}

/// η = A_min/A_max from the two-mode amplitude ratio.
pub fn eta_two_mode<T: Real>(g: T, z_p: T, length: T) -> Result<T> {
    let r = amplitude_ratio(g, z_p, length)?;
    Ok(r.min(T::one() / r))
}

/// θ₊ − θ₋ = (ω₊ − ω₋)t₀ − (β₊ − β₋) − 2φ wrapped to (−π, π]. The figure
/// sign convention is applied by [`phase_shift_convention`].
pub fn phase_difference<T: Real>(g: T, z_p: T, length: T, t0: T, omega_split: T) -> Result<T> {
    let sys = TwoModeSystem::new(T::one(), g);
    let (s, c) = sys.mixing()?;
    let phi = sys.phi()?;
    let (np, nm) = nu_at(s, c, z_p, length);
    Ok(wrap_angle(omega_split * t0 - (np.arg() - nm.arg()) - lit::<T>(2.0) * phi))
}

/// δθ as plotted: θ₊ − θ₋ in the symmetric phase and in the broken phase
/// with G < 0, θ₋ − θ₊ in the broken phase with G > 0.
pub fn phase_shift_convention<T: Real>(theta_plus_minus: T, broken: bool, gradient: T) -> T {
    if broken && gradient > T::zero() {
        wrap_angle(-theta_plus_minus)
    } else {
        theta_plus_minus
    }
}

/// Parameters of the two-mode broken-phase FID at a probe position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeFid<T> {
    pub system: TwoModeSystem<T>,
    pub phi: T,
    pub a_plus: T,
    pub a_minus: T,
    pub beta_plus: T,
    pub beta_minus: T,
    /// s± = Γ₂c + ε + iγB₀ ± iε√(g²−1).
    pub s_plus: Complex<T>,
    pub s_minus: Complex<T>,
    pub t0: T,
}

pub fn two_mode_fid<T: Real>(config: &PhysicalConfig<T>, probe: &ProbeGeometry<T>) -> Result<TwoModeFid<T>> {
    probe.validate(config.cell_length)?;
    let system = two_mode(config)?;
    let (s, c) = system.mixing()?;
    let phi = system.phi()?;
    let (np, nm) = nu_at(s, c, probe.z_p, config.cell_length);
    let base = Complex::new(config.gamma_collision + system.epsilon, config.larmor());
    let split = Complex::new(T::zero(), system.epsilon * (system.g * system.g - T::one()).sqrt());
    Ok(TwoModeFid {
        system,
        phi,
        a_plus: np.norm(),
        a_minus: nm.norm(),
        beta_plus: np.arg(),
        beta_minus: nm.arg(),
        s_plus: base + split,
        s_minus: base - split,
        t0: probe.t0,
    })
}

impl<T: Real> TwoModeFid<T> {
    /// K_x(t + t₀) = Re[(e^{iφ}e^{−s₊t}ν₊ + e^{−iφ}e^{−s₋t}ν₋)/(√2 cos φ)] for
    /// uniform unit initial polarization.
    pub fn eval(&self, t: T) -> T {
        let tt = t + self.t0;
        let np = Complex::from_polar(self.a_plus, self.beta_plus);
        let nm = Complex::from_polar(self.a_minus, self.beta_minus);
        let ep = Complex::from_polar(T::one(), self.phi);
        let v = ep * (-self.s_plus * tt).exp() * np + ep.conj() * (-self.s_minus * tt).exp() * nm;
        v.re / (T::SQRT_2() * self.phi.cos())
    }

    /// The same signal as two sine components (signed frequencies kept).
    pub fn components(&self) -> [FidComponent<T>; 2] {
        let pre = T::one() / (T::SQRT_2() * self.phi.cos());
        let half_pi = T::FRAC_PI_2();
        let make = |a: T, s: Complex<T>, theta: T| FidComponent {
            amplitude: a * pre,
            tau: T::one() / s.re,
            omega: s.im,
            phase: theta + half_pi,
        }
        .shifted(self.t0);
        [
            make(self.a_plus, self.s_plus, -(self.beta_plus + self.phi)),
            make(self.a_minus, self.s_minus, -(self.beta_minus - self.phi)),
        ]
    }
}

/// K_x on `t_grid` from the two-mode closed form (broken phase only).
pub fn fid_two_mode<T: Real>(config: &PhysicalConfig<T>, probe: &ProbeGeometry<T>, t_grid: &[T]) -> Result<Vec<T>> {
    let f = two_mode_fid(config, probe)?;
    Ok(t_grid.iter().map(|&t| f.eval(t)).collect())
}

/// Contribution of eigenmode k to K_x at the probe:
/// A_k = |c_k M_k(z_p)|, θ_k = −arg(c_k M_k(z_p)), K_x ⊃ A_k cos(ω_k t + θ_k)e^{−Γ_k t}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitude<T> {
    pub index: usize,
    pub eigenvalue: ComplexEigenvalue<T>,
    pub amplitude: T,
    pub theta: T,
}

impl<T: Real> ModeAmplitude<T> {
    pub fn component(&self) -> FidComponent<T> {
        FidComponent {
            amplitude: self.amplitude,
            tau: T::one() / self.eigenvalue.decay,
            omega: self.eigenvalue.frequency,
            phase: self.theta + T::FRAC_PI_2(),
        }
    }
}

/// Exact-mode amplitudes for a uniform initial state, modes 0..=k_max.
pub fn exact_mode_amplitudes<T: Real>(
    config: &PhysicalConfig<T>,
    z_p: T,
    k_max: usize,
) -> Result<Vec<ModeAmplitude<T>>> {
    ProbeGeometry { z_p, t0: T::zero() }.validate(config.cell_length)?;
    let problem = to_dimensionless(config)?;
    let spectrum = solve_spectrum(problem.g_prime, k_max.max(1))?;
    let zeta = lit::<T>(2.0) * z_p / config.cell_length;
    spectrum.q[..=k_max]
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let m = eigenmode(problem.g_prime, q, DEFAULT_GRID, k)?;
            let v = m.uniform_projection() * m.at(zeta);
            Ok(ModeAmplitude {
                index: k,
                eigenvalue: physical_eigenvalue(&problem, q),
                amplitude: v.norm(),
                theta: -v.arg(),
            })
        })
        .collect()
}

/// η = A_min/A_max of modes 0 and 1 from the exact eigenmodes.
pub fn eta_exact<T: Real>(config: &PhysicalConfig<T>, z_p: T) -> Result<T> {
    let a = exact_mode_amplitudes(config, z_p, 1)?;
    let (x, y) = (a[0].amplitude, a[1].amplitude);
    Ok(x.min(y) / x.max(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn broken_cfg() -> PhysicalConfig<f64> {
        PhysicalConfig::xe129().with_gradient(250.0)
    }

    #[test]
    fn canonical_form_preserves_signal() {
        let c = FidComponent { amplitude: -0.7, tau: 3.0, omega: -12.0, phase: 2.9 };
        let k = c.canonical();
        assert!(k.amplitude > 0.0 && k.omega > 0.0);
        for i in 0..50 {
            let t = 0.013 * i as f64;
            assert!((c.eval(t) - k.eval(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn shift_is_evaluation_at_later_time() {
        let c = FidComponent { amplitude: 0.4, tau: 2.0, omega: 7.0, phase: 0.3 };
        let s = c.shifted(0.25);
        for i in 0..20 {
            let t = 0.1 * i as f64;
            assert!((s.eval(t) - c.eval(t + 0.25)).abs() < 1e-14);
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let m = FidModel {
            components: vec![FidComponent { amplitude: 1.0, tau: 1.0, omega: 30.0, phase: 0.0 }],
            noise_sigma: 0.1,
            sample_rate: 100.0,
            duration: 5.0,
        };
        let a = synthesize(&m, 7).unwrap();
        let b = synthesize(&m, 7).unwrap();
        let c = synthesize(&m, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.y, c.y);
        assert_eq!(a.len(), 500);
        assert!(a.uniform_step().is_some());
    }

    #[test]
    fn fitting_preconditions() {
        let mut m = FidModel {
            components: vec![FidComponent { amplitude: 1.0, tau: 2.0, omega: 30.0, phase: 0.0 }],
            noise_sigma: 0.0,
            sample_rate: 100.0,
            duration: 5.0,
        };
        assert!(m.validate_for_fitting().is_err());
        m.duration = 10.0;
        assert!(m.validate_for_fitting().is_ok());
        m.sample_rate = 15.0;
        assert!(m.validate_for_fitting().is_err());
    }

    #[test]
    fn triplet_is_symmetric() {
        let acq = Acquisition { sample_rate: 1000.0, duration: 60.0, noise_sigma: 0.0 };
        let m = quadrupole_triplet(2.0 * PI * 76.0, 2.0 * PI * 0.022, [1.0, 2.0, 1.0], [10.0; 3], acq).unwrap();
        let w: Vec<f64> = m.components.iter().map(|c| c.omega).collect();
        assert!((w[0] + w[2] - 2.0 * w[1]).abs() < 1e-12);
        assert!(((w[2] - w[1]) / (2.0 * PI) - 0.022).abs() < 1e-12);
        let z = quadrupole_triplet(1.0, 0.0, [1.0; 3], [1.0; 3], acq).unwrap();
        assert!(z.components.iter().all(|c| c.omega == 1.0));
        assert!(quadrupole_triplet(1.0, -0.1, [1.0; 3], [1.0; 3], acq).is_err());
    }

    #[test]
    fn two_mode_fid_starts_from_uniform_state() {
        for &z in &[-0.3, -0.056, 0.0, 0.2] {
            let f = two_mode_fid(&broken_cfg(), &ProbeGeometry { z_p: z, t0: 0.0 }).unwrap();
            assert!((f.eval(0.0) - 1.0).abs() < 1e-12, "z={z}: {}", f.eval(0.0));
        }
    }

    #[test]
    fn centre_probe_has_equal_amplitudes() {
        assert!((amplitude_ratio(2.5_f64, 0.0, 0.8).unwrap() - 1.0).abs() < 1e-15);
        let f = two_mode_fid(&broken_cfg(), &ProbeGeometry { z_p: 0.0, t0: 0.0 }).unwrap();
        assert!((f.a_plus - f.a_minus).abs() < 1e-15);
    }

    #[test]
    fn ratio_matches_nu_moduli() {
        let cfg = broken_cfg();
        let f = two_mode_fid(&cfg, &ProbeGeometry { z_p: -0.174, t0: 0.0 }).unwrap();
        let r = amplitude_ratio(f.system.g, -0.174, 0.8).unwrap();
        assert!((r - f.a_plus / f.a_minus).abs() < 1e-13);
        assert!(eta_two_mode(f.system.g, -0.174, 0.8).unwrap() <= 1.0);
        assert!(amplitude_ratio(0.9_f64, 0.1, 0.8).is_err());
    }

    #[test]
    fn components_reproduce_closed_form() {
        let cfg = broken_cfg();
        let f = two_mode_fid(&cfg, &ProbeGeometry { z_p: -0.056, t0: 0.37 }).unwrap();
        let comps = f.components();
        for i in 0..400 {
            let t = 0.0123 * i as f64;
            let sum: f64 = comps.iter().map(|c| c.eval(t)).sum();
            let canon: f64 = comps.iter().map(|c| c.canonical().eval(t)).sum();
            assert!((sum - f.eval(t)).abs() < 1e-12);
            assert!((canon - f.eval(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_difference_properties() {
        let g = 2.0_f64;
        let phi = TwoModeSystem::new(1.0, g).phi().unwrap();
        let d0 = phase_difference(g, 0.0, 0.8, 0.0, 3.0).unwrap();
        assert!((d0 - wrap_angle(-2.0 * phi)).abs() < 1e-14);
        let a = phase_difference(g, -0.1, 0.8, 0.0, 3.0).unwrap();
        let b = phase_difference(g, -0.1, 0.8, 0.2, 3.0).unwrap();
        assert!((wrap_angle(b - a - 0.6)).abs() < 1e-13);
        assert_eq!(phase_shift_convention(0.5, true, 10.0), -0.5);
        assert_eq!(phase_shift_convention(0.5, true, -10.0), 0.5);
    }

    #[test]
    fn phase_difference_matches_components() {
        let cfg = broken_cfg();
        let probe = ProbeGeometry { z_p: -0.174, t0: 0.21 };
        let f = two_mode_fid(&cfg, &probe).unwrap();
        let [p, m] = f.components();
        // θ = phase − π/2 in the cosine convention
        let got = wrap_angle(p.phase - m.phase);
        let want = phase_difference(f.system.g, probe.z_p, 0.8, probe.t0, f.s_plus.im - f.s_minus.im).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn exact_amplitudes_at_zero_gradient() {
        let a = exact_mode_amplitudes(&PhysicalConfig::<f64>::xe129(), -0.1, 1).unwrap();
        assert!((a[0].amplitude - 1.0).abs() < 1e-12);
        assert!(a[1].amplitude < 1e-9);
    }

    #[test]
    fn exact_modes_reconstruct_uniform_state() {
        let cfg = PhysicalConfig::<f64>::xe129().with_gradient(60.0);
        let a = exact_mode_amplitudes(&cfg, -0.12, 7).unwrap();
        let k0: f64 = a.iter().map(|m| m.amplitude * m.theta.cos()).sum();
        assert!((k0 - 1.0).abs() < 2e-3, "{k0}");
    }
}
