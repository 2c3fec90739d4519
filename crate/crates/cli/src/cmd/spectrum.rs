use std::f64::consts::TAU;
use std::path::Path;

use torrey_lab::fid::TimeSeries;
use torrey_lab::spectral::{fit, periodogram, trim_policy, FitInit, FitReport, ModelKind};

use super::hz;
use crate::failure::{CliResult, Failure};
use crate::output::{read_columns, Ctx, Table};
use crate::{ModelArg, SpectrumCmd};

pub fn read_series(path: &Path) -> CliResult<TimeSeries<f64>> {
    let mut cols = read_columns(path, &["t_seconds", "signal"])?;
    let y = cols.pop().unwrap_or_default();
    let t = cols.pop().unwrap_or_default();
    Ok(TimeSeries { t, y })
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Slp => ModelKind::Slp,
            ModelArg::Dlp => ModelKind::Dlp,
            ModelArg::Tlp => ModelKind::Tlp,
            ModelArg::Dlpm => ModelKind::Dlpm,
        }
    }
}

/// Writes the report, then maps non-convergence to its exit code.
pub fn emit_report(ctx: &Ctx, name: &str, report: &FitReport<f64>) -> CliResult<()> {
    ctx.emit_json(name, report)?;
    if report.converged {
        Ok(())
    } else {
        Err(Failure::no_convergence(format!(
            "{} fit did not converge after {} iterations",
            report.model_kind, report.n_iter
        )))
    }
}

pub fn run(ctx: &Ctx, cmd: SpectrumCmd) -> CliResult<()> {
    let oversample = ctx.config.fit.oversample;
    match cmd {
        SpectrumCmd::Fit { input, model, phi0, delta_q, t2, band } => {
            let mut series = read_series(&input)?;
            if let Some(t2) = t2 {
                series = trim_policy(&series, t2)?.series;
            }
            let pg = periodogram(&series, oversample)?;
            let init = FitInit {
                phi0: phi0.or(ctx.config.fit.phi0),
                delta_omega_q: delta_q,
                search_band: band.map(|b| (b[0] * TAU, b[1] * TAU)),
                max_iter: ctx.config.fit.max_iter,
                ..FitInit::default()
            };
            let report = fit(&pg, model.into(), &init)?;
            emit_report(ctx, "report.json", &report)
        }
        SpectrumCmd::Psd { input, fmin, fmax } => {
            let series = read_series(&input)?;
            let pg = periodogram(&series, oversample)?;
            let (lo, hi) = (fmin.unwrap_or(f64::NEG_INFINITY), fmax.unwrap_or(f64::INFINITY));
            let mut t = Table::new(&["omega_hz", "power"]);
            for (w, p) in pg.omega_grid.iter().zip(&pg.power) {
                let f = hz(*w);
                if f >= lo && f <= hi {
                    t.push_nums(&[f, *p]);
                }
            }
            ctx.emit_csv("psd.csv", &t)
        }
    }
}
