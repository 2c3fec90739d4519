pub mod bench;
pub mod comag;
pub mod eig;
pub mod fid;
pub mod figure;
pub mod pert;
pub mod pipeline;
pub mod spectrum;

use std::f64::consts::TAU;

use crate::failure::{CliResult, Failure};

/// `steps + 1` evenly spaced points from `lo` to `hi`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> CliResult<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Failure::config(format!("bad range [{lo}, {hi}]")));
    }
    if steps == 0 {
        return Ok(vec![lo]);
    }
    Ok((0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect())
}

pub fn hz(omega: f64) -> f64 {
    omega / TAU
}
