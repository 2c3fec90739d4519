//! TOML run configuration. Every key is optional; omitted keys take the
//! main-text ¹²⁹Xe cell values. Units follow the library: rad·s⁻¹·nT⁻¹ for
//! γ, cm, nT, nT/cm, s⁻¹, Hz for sample rates.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use torrey_lab::bench::{BenchSettings, Jitter};
use torrey_lab::model::{gamma_129, PhysicalConfig, GYRO_RATIO_129_131, LARMOR_129_HZ};
use torrey_lab::spectral::{ModelKind, DEFAULT_OVERSAMPLE};

use crate::failure::{CliResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Isotope {
    Xe129,
    Xe131,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physical {
    /// Species used by single-species commands.
    pub isotope: Isotope,
    /// γ₁₂₉, rad·s⁻¹·nT⁻¹.
    pub gamma_129: f64,
    /// R = γ₁₂₉/γ₁₃₁.
    pub ratio: f64,
    pub diffusion: f64,
    pub cell_length: f64,
    pub gradient: f64,
    /// Defaults to |γ₁₂₉B₀|/(2π) = 257.45 Hz.
    pub bias_field: Option<f64>,
    pub gamma_collision: f64,
    pub wall_lambda: f64,
}

impl Default for Physical {
    fn default() -> Self {
        let p = PhysicalConfig::<f64>::xe129();
        Self {
            isotope: Isotope::Xe129,
            gamma_129: gamma_129(),
            ratio: GYRO_RATIO_129_131,
            diffusion: p.diffusion,
            cell_length: p.cell_length,
            gradient: p.gradient,
            bias_field: None,
            gamma_collision: p.gamma_collision,
            wall_lambda: p.wall_lambda,
        }
    }
}

impl Physical {
    pub fn species(&self, isotope: Isotope) -> PhysicalConfig<f64> {
        let gamma = match isotope {
            Isotope::Xe129 => self.gamma_129,
            Isotope::Xe131 => self.gamma_129 / self.ratio,
        };
        PhysicalConfig {
            gamma,
            diffusion: self.diffusion,
            cell_length: self.cell_length,
            gradient: self.gradient,
            bias_field: self.bias_field.unwrap_or(LARMOR_129_HZ * std::f64::consts::TAU / self.gamma_129.abs()),
            gamma_collision: self.gamma_collision,
            wall_lambda: self.wall_lambda,
        }
    }

    pub fn selected(&self) -> PhysicalConfig<f64> {
        self.species(self.isotope)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Probe {
    /// cm from the cell centre.
    pub z_p: f64,
    pub t0: f64,
}

impl Default for Probe {
    fn default() -> Self {
        Self { z_p: torrey_lab::bench::BENCH_Z_P_CM, t0: 0.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Acquisition {
    pub sample_rate: f64,
    /// s; defaults to 12 times the slowest decay time.
    pub duration: Option<f64>,
    pub noise_sigma: f64,
    /// Eigenmodes 0..=k_max contribute to the synthesized signal.
    pub k_max: usize,
}

impl Default for Acquisition {
    fn default() -> Self {
        Self { sample_rate: 2000.0, duration: None, noise_sigma: 0.01, k_max: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fit {
    /// Two-peak model for broken-phase signals: dlp or dlpm.
    pub model: String,
    pub oversample: f64,
    pub phi0: Option<f64>,
    pub max_iter: usize,
}

impl Default for Fit {
    fn default() -> Self {
        Self { model: "dlp".into(), oversample: DEFAULT_OVERSAMPLE, phi0: None, max_iter: 500 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bench {
    pub sample_rate: f64,
    pub noise_sigma: f64,
    pub oversample: f64,
    pub record_t2: f64,
    pub jitter_amplitude_rel: f64,
    pub jitter_tau_rel: f64,
    pub jitter_frequency_hz: f64,
}

impl Default for Bench {
    fn default() -> Self {
        let s = BenchSettings::<f64>::default();
        Self {
            sample_rate: s.sample_rate,
            noise_sigma: s.noise_sigma,
            oversample: s.oversample,
            record_t2: s.record_t2,
            jitter_amplitude_rel: s.jitter.amplitude_rel,
            jitter_tau_rel: s.jitter.tau_rel,
            jitter_frequency_hz: s.jitter.frequency_hz,
        }
    }
}

impl Bench {
    pub fn settings(&self) -> BenchSettings<f64> {
        BenchSettings {
            sample_rate: self.sample_rate,
            noise_sigma: self.noise_sigma,
            oversample: self.oversample,
            record_t2: self.record_t2,
            jitter: Jitter {
                amplitude_rel: self.jitter_amplitude_rel,
                tau_rel: self.jitter_tau_rel,
                frequency_hz: self.jitter_frequency_hz,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    #[serde(rename = "2w")]
    TwoOmega,
    #[serde(rename = "3w")]
    ThreeOmega,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Comag {
    pub estimator: Estimator,
    /// Pump-power response (χ₁, χ₂, χ₃) of (|ω₁₂₉|, Δω₁₂₉, |ω₁₃₁|), mHz/mW.
    pub chi_mhz_per_mw: [f64; 3],
}

impl Default for Comag {
    fn default() -> Self {
        Self { estimator: Estimator::Both, chi_mhz_per_mw: [-1.57, 0.075, -0.452] }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub physical: Physical,
    pub probe: Probe,
    pub acquisition: Acquisition,
    pub fit: Fit,
    pub bench: Bench,
    pub comag: Comag,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut cfg: Config = match path {
            None => Config::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::config(format!("cannot read config {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Failure::config(format!("config {}: {e}", p.display())))?
            }
        };
        cfg.physical.bias_field = Some(cfg.physical.species(Isotope::Xe129).bias_field);
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        self.physical.species(Isotope::Xe129).validate()?;
        if !(self.physical.ratio.is_finite() && self.physical.ratio != 0.0) {
            return Err(Failure::config("physical.ratio must be finite and non-zero"));
        }
        let a = &self.acquisition;
        if !(a.sample_rate > 0.0) || !(a.noise_sigma >= 0.0) || a.duration.is_some_and(|d| !(d > 0.0)) {
            return Err(Failure::config("acquisition needs sample_rate > 0, noise_sigma >= 0, duration > 0"));
        }
        let kind = self.fit_model()?;
        if !matches!(kind, ModelKind::Dlp | ModelKind::Dlpm) {
            return Err(Failure::config("fit.model must be dlp or dlpm"));
        }
        if !(self.fit.oversample >= 1.0) {
            return Err(Failure::config("fit.oversample must be >= 1"));
        }
        Ok(())
    }

    pub fn fit_model(&self) -> CliResult<ModelKind> {
        self.fit.model.parse().map_err(|e: torrey_lab::Error| Failure::config(e.to_string()))
    }

    /// SHA-256 of the resolved configuration in canonical TOML.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        hex(&Sha256::digest(text.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
