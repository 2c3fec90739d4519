//! Dependence of the DLP solution on the Δφ starting value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_series, make_case, outcome_from, search_band, truth_params, truth_vector, BenchSettings, BenchmarkCase, PARAMS};
use crate::error::Result;
use crate::fid::synthesize;
use crate::scalar::{lit, wrap_angle, Real};
use crate::spectral::FitInit;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phi0Row<T> {
    pub phi0: T,
    /// None when the fit failed.
    pub errors: Option<[T; 6]>,
    pub ci95: Option<[T; 6]>,
}

/// One parameter's distinct error plateaus: (centre, member count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clusters<T> {
    pub param: String,
    pub plateaus: Vec<(T, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phi0Sweep<T> {
    pub case: BenchmarkCase<T>,
    pub rows: Vec<Phi0Row<T>>,
    pub clusters: Vec<Clusters<T>>,
}

impl<T: Real> Phi0Sweep<T> {
    pub fn n_clusters(&self, param: &str) -> usize {
        self.clusters.iter().find(|c| c.param == param).map_or(0, |c| c.plateaus.len())
    }
}

/// Groups sorted values split at gaps wider than `tol`; for angles the
/// circle is cut at its widest gap first.
fn cluster<T: Real>(values: &[T], tol: T, circular: bool) -> Vec<(T, usize)> {
    if values.is_empty() {
        return vec![];
    }
    let mut v: Vec<T> = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if circular && v.len() > 1 {
        // Rotate so the list starts after the widest gap on the circle.
        let n = v.len();
        let mut cut = 0;
        let mut widest = v[0] + T::TAU() - v[n - 1];
        for k in 1..n {
            if v[k] - v[k - 1] > widest {
                widest = v[k] - v[k - 1];
                cut = k;
            }
        }
        v.rotate_left(cut);
        for k in 1..n {
            while v[k] < v[k - 1] {
                v[k] += T::TAU();
            }
        }
    }
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=v.len() {
        if k == v.len() || v[k] - v[k - 1] > tol {
            let group = &v[start..k];
            let c = group.iter().copied().sum::<T>() / lit::<T>(group.len() as f64);
            out.push((if circular { wrap_angle(c) } else { c }, group.len()));
            start = k;
        }
    }
    out
}

/// Fits one fixed signal (fixed truth and noise) from `n` random Δφ starts
/// and reports the error plateaus each parameter settles on. Plateaus are
/// separated when their gap exceeds a tenth of the median CI half-width.
pub fn phi0_sweep<T: Real>(g: T, n: usize, seed: u64, settings: &BenchSettings<T>) -> Result<Phi0Sweep<T>> {
    let truth = truth_params(g)?;
    let case = make_case(&truth, settings, seed);
    let series = synthesize(&case.truth, case.seed)?;
    let tv = truth_vector(&case.truth, T::zero())?;
    let amps = (case.truth.components[0].amplitude, case.truth.components[1].amplitude);
    let t2 = case.truth.components.iter().map(|c| c.tau).fold(T::zero(), T::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_F00D);
    let starts: Vec<T> = (0..n)
        .map(|_| lit::<T>(std::f64::consts::PI - rng.random::<f64>() * std::f64::consts::TAU))
        .collect();
    let rows: Vec<Phi0Row<T>> = starts
        .par_iter()
        .map(|&phi0| {
            let init = FitInit {
                phi0: Some(phi0),
                search_band: Some(search_band(&case.truth)),
                ..FitInit::default()
            };
            match fit_series(&series, t2, case.oversample, &init) {
                Ok(r) => {
                    let o = outcome_from(r, tv, amps);
                    Phi0Row { phi0, errors: Some(o.errors), ci95: Some(o.ci95) }
                }
                Err(_) => Phi0Row { phi0, errors: None, ci95: None },
            }
        })
        .collect();
    let clusters = PARAMS
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let e: Vec<T> = rows.iter().filter_map(|r| r.errors.map(|e| e[k])).collect();
            let mut u: Vec<T> = rows.iter().filter_map(|r| r.ci95.map(|c| c[k])).filter(|v| v.is_finite()).collect();
            u.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            let tol = if u.is_empty() { T::zero() } else { u[u.len() / 2] * lit(0.1) };
            Clusters {
                param: name.to_string(),
                plateaus: cluster(&e, tol, k == 5),
            }
        })
        .collect();
    Ok(Phi0Sweep { case, rows, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_on_line_and_circle() {
        let v = [1.0, 1.01, 1.02, 5.0, 5.01];
        let c = cluster(&v, 0.1, false);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].1, 3);
        let pi = std::f64::consts::PI;
        let a = [pi - 0.01, -pi + 0.01, 0.5];
        let c = cluster(&a, 0.1, true);
        assert_eq!(c.len(), 2);
        assert!(c.iter().any(|(x, n)| *n == 2 && (x.abs() - pi).abs() < 1e-9));
    }
}
