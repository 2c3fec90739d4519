//! Frequencies in files are Hz. The estimators are linear and homogeneous
//! in the frequency unit, so they run on Hz directly: slopes come out in
//! Hz/nT and Hz/mW, Ω in Hz.

use std::path::Path;

use serde::{Deserialize, Serialize};
use torrey_lab::comag::{calibrate, omega_rot_2w, omega_rot_3w, CalibrationMatrix, FrequencyTriple, SweepSlopes};

use super::hz;
use crate::failure::{CliResult, Failure};
use crate::output::{read_columns, Ctx, Table};
use crate::ComagCmd;

const TRIPLE_COLUMNS: [&str; 3] = ["omega_129_hz", "delta_omega_129_hz", "omega_131_hz"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub frequency_unit: String,
    /// B₀ sweep slopes (Hz/nT), absent for the structured matrix.
    pub b0: Option<SweepSlopes<f64>>,
    /// Pump sweep slopes (Hz/mW).
    pub pump: Option<SweepSlopes<f64>>,
    pub calibration: CalibrationMatrix<f64>,
}

fn read_triples(path: &Path) -> CliResult<Vec<FrequencyTriple<f64>>> {
    let c = read_columns(path, &TRIPLE_COLUMNS)?;
    Ok((0..c[0].len())
        .map(|i| FrequencyTriple { omega_129: c[0][i], delta_omega_129: c[1][i], omega_131: c[2][i] })
        .collect())
}

fn read_sweep(path: &Path, which: &str) -> CliResult<SweepSlopes<f64>> {
    let c = read_columns(path, &["x", TRIPLE_COLUMNS[0], TRIPLE_COLUMNS[1], TRIPLE_COLUMNS[2]])?;
    let pts: Vec<(f64, FrequencyTriple<f64>)> = (0..c[0].len())
        .map(|i| (c[0][i], FrequencyTriple { omega_129: c[1][i], delta_omega_129: c[2][i], omega_131: c[3][i] }))
        .collect();
    Ok(calibrate(&pts, which)?)
}

pub fn read_calibration(path: &Path) -> CliResult<CalibrationFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

/// The structured matrix in Hz units from the configured γ and χ.
pub fn structured_hz(ctx: &Ctx) -> CliResult<CalibrationMatrix<f64>> {
    let p = &ctx.config.physical;
    let g129 = hz(p.gamma_129);
    let chi = ctx.config.comag.chi_mhz_per_mw.map(|c| c * 1e-3);
    Ok(CalibrationMatrix::structured(g129, g129 / p.ratio, chi)?)
}

pub fn run(ctx: &Ctx, cmd: ComagCmd) -> CliResult<()> {
    match cmd {
        ComagCmd::TwoOmega { input, cal } => {
            if let Some(c) = cal {
                read_calibration(&c)?;
            }
            let c = read_columns(&input, &["omega_129_hz", "omega_131_hz"])?;
            let r = ctx.config.physical.ratio;
            let mut t = Table::new(&["omega_rot_2w_hz"]);
            for (w129, w131) in c[0].iter().zip(&c[1]) {
                t.push_nums(&[omega_rot_2w(*w129, *w131, r)]);
            }
            ctx.emit_csv("omega_2w.csv", &t)
        }
        ComagCmd::ThreeOmega { input, cal } => {
            let cal = read_calibration(&cal)?.calibration;
            let triples = read_triples(&input)?;
            let Some(reference) = triples.first() else {
                return Err(Failure::config(format!("{}: no rows", input.display())));
            };
            let mut t = Table::new(&["d_b0_nt", "d_pump_mw", "d_omega_rot_hz"]);
            for tr in &triples {
                let s = omega_rot_3w(tr.delta_from(reference), &cal)?;
                t.push_nums(&[s.d_b0, s.d_pump, s.d_omega_rot]);
            }
            ctx.emit_csv("omega_3w.csv", &t)
        }
        ComagCmd::Calibrate { b0, pump, structured } => {
            let file = if structured {
                CalibrationFile { frequency_unit: "Hz".into(), b0: None, pump: None, calibration: structured_hz(ctx)? }
            } else {
                let (Some(b0), Some(pump)) = (b0, pump) else {
                    return Err(Failure::config("calibrate needs --b0 and --pump sweeps, or --structured"));
                };
                let b0 = read_sweep(&b0, "B0")?;
                let pump = read_sweep(&pump, "P_pump")?;
                let calibration = CalibrationMatrix::from_sweeps(&b0, &pump)?;
                CalibrationFile { frequency_unit: "Hz".into(), b0: Some(b0), pump: Some(pump), calibration }
            };
            ctx.emit_json("cal.json", &file)
        }
    }
}
