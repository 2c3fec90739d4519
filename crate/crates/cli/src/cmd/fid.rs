use torrey_lab::fid::{exact_mode_amplitudes, synthesize, FidComponent, FidModel, TimeSeries};
use torrey_lab::model::PhysicalConfig;

use crate::config::{Acquisition, Probe};
use crate::failure::CliResult;
use crate::output::{Ctx, Table};
use crate::FidCmd;

/// Record length when none is configured, in slowest decay times.
pub const DEFAULT_RECORD_T2: f64 = 12.0;

/// Signal at the probe from eigenmodes 0..=k_max for a uniform initial
/// polarization, observed from t₀.
pub fn signal_model(cfg: &PhysicalConfig<f64>, probe: &Probe, acq: &Acquisition) -> CliResult<FidModel<f64>> {
    let modes = exact_mode_amplitudes(cfg, probe.z_p, acq.k_max)?;
    let components: Vec<FidComponent<f64>> = modes.iter().map(|m| m.component().shifted(probe.t0)).collect();
    let tau = components.iter().map(|c| c.tau).fold(0.0, f64::max);
    let model = FidModel {
        components,
        noise_sigma: acq.noise_sigma,
        sample_rate: acq.sample_rate,
        duration: acq.duration.unwrap_or(DEFAULT_RECORD_T2 * tau),
    };
    model.validate()?;
    Ok(model)
}

pub fn series_table(s: &TimeSeries<f64>) -> Table {
    let mut t = Table::new(&["t_seconds", "signal"]);
    for (ti, yi) in s.t.iter().zip(&s.y) {
        t.push_nums(&[*ti, *yi]);
    }
    t
}

pub fn run(ctx: &Ctx, cmd: FidCmd) -> CliResult<()> {
    let FidCmd::Synth { zp, gradient } = cmd;
    let mut probe = ctx.config.probe.clone();
    if let Some(z) = zp {
        probe.z_p = z;
    }
    let mut cfg = ctx.config.physical.selected();
    if let Some(g) = gradient {
        cfg.gradient = g;
    }
    let model = signal_model(&cfg, &probe, &ctx.config.acquisition)?;
    let series = synthesize(&model, ctx.seed)?;
    ctx.emit_csv("fid.csv", &series_table(&series))
}
