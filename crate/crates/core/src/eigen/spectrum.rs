//! Ordered eigenvalue spectra by continuation in g′ from the Neumann
//! Laplacian.
//!
//! Eigenvalues are tracked in pairs (q₂ₚ, q₂ₚ₊₁) through their sum and
//! product, which stay analytic across the exceptional point where the pair
//! merges. Seeds at the next g′ are the roots of z² − Sz + P with S and P
//! extrapolated from the recent history.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ep::ep_location;
use super::shooting::Shooter;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// PT phase of the lowest eigenvalue pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Symmetric,
    Exceptional,
    Broken,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::Symmetric => "symmetric",
            Phase::Exceptional => "exceptional",
            Phase::Broken => "broken",
        }
    }
}

/// Eigenvalues q₀..q_{k_max} at one g′.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    pub g_prime: T,
    pub q: Vec<Complex<T>>,
    pub phase: Phase,
    /// Index p of the exceptional point g′ₚ the input sits on, if any. The
    /// merged pair is then reported twice.
    pub degenerate_pair: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweep<T> {
    pub g_values: Vec<T>,
    pub eigenvalues: Vec<Vec<Complex<T>>>,
    pub phase_label: Vec<Phase>,
}

/// Continuation controls.
#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions {
    pub shooter: Shooter,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Inputs closer than this to an exceptional point are treated as on it.
    pub ep_snap: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            shooter: Shooter::default(),
            initial_step: 0.1,
            max_step: 0.25,
            min_step: 1e-7,
            ep_snap: 1e-6,
        }
    }
}

/// Sorts by ascending real part, ties (within `tol`) by ascending imaginary
/// part, and makes near-conjugate pairs exactly conjugate.
pub fn sort_spectrum<T: Real>(q: &mut [Complex<T>]) {
    let tol = lit::<T>(T::CMP_TOL.sqrt() * 1e-2);
    q.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    let n = q.len();
    let mut i = 0;
    while i + 1 < n {
        let (a, b) = (q[i], q[i + 1]);
        let scale = T::one().max(a.norm());
        if (a.re - b.re).abs() <= tol * scale {
            if a.im > b.im {
                q.swap(i, i + 1);
            }
            let (a, b) = (q[i], q[i + 1]);
            if (a - b.conj()).norm() <= tol * scale && a.im != T::zero() {
                let re = (a.re + b.re) / lit(2.0);
                let im = (b.im - a.im) / lit(2.0);
                q[i] = Complex::new(re, -im);
                q[i + 1] = Complex::new(re, im);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
}

fn extrapolate<T: Real>(hist: &[(T, Complex<T>)], x: T) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (i, &(xi, yi)) in hist.iter().enumerate() {
        let mut w = T::one();
        for (j, &(xj, _)) in hist.iter().enumerate() {
            if i != j {
                w = w * (x - xj) / (xi - xj);
            }
        }
        acc = acc + yi * w;
    }
    acc
}

fn quadratic_roots<T: Real>(s: Complex<T>, p: Complex<T>) -> (Complex<T>, Complex<T>) {
    let two = lit::<T>(2.0);
    let disc = (s * s - p * lit::<T>(4.0)).sqrt();
    ((s - disc) / two, (s + disc) / two)
}

struct Pair<T> {
    hist_s: Vec<(T, Complex<T>)>,
    hist_p: Vec<(T, Complex<T>)>,
    roots: (Complex<T>, Complex<T>),
}

impl<T: Real> Pair<T> {
    fn push(&mut self, g: T, a: Complex<T>, b: Complex<T>) {
        self.hist_s.push((g, a + b));
        self.hist_p.push((g, a * b));
        if self.hist_s.len() > 3 {
            self.hist_s.remove(0);
            self.hist_p.remove(0);
        }
        self.roots = (a, b);
    }

    fn predict(&self, g: T) -> (Complex<T>, Complex<T>) {
        (extrapolate(&self.hist_s, g), extrapolate(&self.hist_p, g))
    }
}

struct Tracker<T> {
    opts: ContinuationOptions,
    pairs: Vec<Pair<T>>,
    g: T,
    eps: Vec<T>,
}

impl<T: Real> Tracker<T> {
    fn new(n_pairs: usize, opts: ContinuationOptions) -> Result<Self> {
        let quarter_pi = T::FRAC_PI_2();
        let pairs = (0..n_pairs)
            .map(|p| {
                let a = lit::<T>((2 * p) as f64) * quarter_pi;
                let b = lit::<T>((2 * p + 1) as f64) * quarter_pi;
                let (a, b) = (Complex::new(a * a, T::zero()), Complex::new(b * b, T::zero()));
                let mut pair = Pair {
                    hist_s: Vec::new(),
                    hist_p: Vec::new(),
                    roots: (a, b),
                };
                pair.push(T::zero(), a, b);
                pair
            })
            .collect();
        let eps = (1..=n_pairs)
            .map(|p| ep_location::<T>(p).map(|(g, _)| g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            opts,
            pairs,
            g: T::zero(),
            eps,
        })
    }

    fn near_ep(&self, g: T, within: T) -> Option<usize> {
        self.eps.iter().position(|&e| (g - e).abs() < within)
    }

    /// Solves every pair at `g`; returns the new roots without committing.
    fn solve_at(&self, g: T) -> Result<Vec<(Complex<T>, Complex<T>)>> {
        let sh = self.opts.shooter;
        let seeds: Vec<_> = self
            .pairs
            .iter()
            .map(|p| {
                let (s, pr) = p.predict(g);
                quadratic_roots(s, pr)
            })
            .collect();
        let mut out = Vec::with_capacity(seeds.len());
        for (i, &(sa, sb)) in seeds.iter().enumerate() {
            let a = sh.newton(g, sa, &[])?;
            let b = sh.newton(g, sb, &[a])?;
            // each root must stay closer to its own pair's seeds than to any
            // other pair's seeds
            for r in [a, b] {
                let own = (r - sa).norm().min((r - sb).norm());
                for (j, &(oa, ob)) in seeds.iter().enumerate() {
                    if j != i {
                        let other = (r - oa).norm().min((r - ob).norm());
                        if other <= own {
                            return Err(Error::BranchCollision {
                                g_prime: g.as_f64(),
                                first: i,
                                second: j,
                            });
                        }
                    }
                }
            }
            let scale = T::one().max(a.norm());
            if (a - b).norm() <= lit::<T>(T::CMP_TOL) * scale && self.near_ep(g, lit(1e-3)).is_none() {
                return Err(Error::BranchCollision {
                    g_prime: g.as_f64(),
                    first: 2 * i,
                    second: 2 * i + 1,
                });
            }
            out.push((a, b));
        }
        Ok(out)
    }

    fn advance_to(&mut self, target: T) -> Result<()> {
        let mut h = lit::<T>(self.opts.initial_step);
        let h_max = lit::<T>(self.opts.max_step);
        let h_min = lit::<T>(self.opts.min_step);
        let keep_out = lit::<T>(1e-5);
        while self.g < target {
            let mut gn = (self.g + h).min(target);
            if gn < target {
                if let Some(p) = self.near_ep(gn, keep_out) {
                    let e = self.eps[p];
                    gn = if e + keep_out < target { e + keep_out } else { e - keep_out };
                    if gn <= self.g {
                        gn = (self.g + target) / lit(2.0);
                    }
                }
            }
            match self.solve_at(gn) {
                Ok(roots) => {
                    for (pair, (a, b)) in self.pairs.iter_mut().zip(roots) {
                        pair.push(gn, a, b);
                    }
                    self.g = gn;
                    h = (h * lit(1.5)).min(h_max);
                }
                Err(e) => {
                    h = h / lit(2.0);
                    if h < h_min {
                        return Err(e);
                    }
                }
            }
        }
        Ok(())
    }

    fn collect(&self) -> Vec<Complex<T>> {
        let mut all: Vec<_> = self
            .pairs
            .iter()
            .flat_map(|p| [p.roots.0, p.roots.1])
            .collect();
        sort_spectrum(&mut all);
        all
    }
}

fn phase_of<T: Real>(g_abs: T, g1: T, snap: T) -> Phase {
    if (g_abs - g1).abs() < snap {
        Phase::Exceptional
    } else if g_abs < g1 {
        Phase::Symmetric
    } else {
        Phase::Broken
    }
}

fn pairs_for(k_max: usize) -> usize {
    (k_max + 2) / 2 + 1
}

/// q₀..q_{k_max} at `g_prime` with default continuation settings.
pub fn solve_spectrum<T: Real>(g_prime: T, k_max: usize) -> Result<Spectrum<T>> {
    solve_spectrum_with(g_prime, k_max, ContinuationOptions::default())
}

pub fn solve_spectrum_with<T: Real>(
    g_prime: T,
    k_max: usize,
    opts: ContinuationOptions,
) -> Result<Spectrum<T>> {
    if k_max < 1 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    if !g_prime.is_finite() {
        return Err(Error::NonFinite("g_prime"));
    }
    let g_abs = g_prime.abs();
    let snap = lit::<T>(opts.ep_snap);
    let mut tr = Tracker::new(pairs_for(k_max), opts)?;
    let degenerate = tr.near_ep(g_abs, snap);

    let mut roots = match degenerate {
        None => {
            tr.advance_to(g_abs)?;
            tr.collect()
        }
        Some(p) => {
            let back = lit::<T>(1e-3);
            tr.advance_to(tr.eps[p] - back)?;
            let merged = {
                let (s, _) = tr.pairs[p].predict(g_abs);
                s / lit::<T>(2.0)
            };
            let shot = tr.opts.shooter.shoot(g_abs, merged)?;
            if shot.derivative.norm() > lit::<T>(1e-4) * shot.scale {
                return Err(Error::NumericFailure(format!(
                    "merged root at exceptional point {} has residual {}",
                    p + 1,
                    shot.derivative.norm()
                )));
            }
            let others = tr.solve_at_except(g_abs, p)?;
            let mut all = others;
            all.push(merged);
            all.push(merged);
            sort_spectrum(&mut all);
            all
        }
    };
    if g_prime < T::zero() {
        for q in roots.iter_mut() {
            *q = q.conj();
        }
        sort_spectrum(&mut roots);
    }
    roots.truncate(k_max + 1);
    let g1 = tr.eps[0];
    Ok(Spectrum {
        g_prime,
        q: roots,
        phase: phase_of(g_abs, g1, snap),
        degenerate_pair: degenerate.map(|p| p + 1),
    })
}

impl<T: Real> Tracker<T> {
    fn solve_at_except(&mut self, g: T, skip: usize) -> Result<Vec<Complex<T>>> {
        let saved: Vec<Pair<T>> = self
            .pairs
            .iter()
            .map(|p| Pair {
                hist_s: p.hist_s.clone(),
                hist_p: p.hist_p.clone(),
                roots: p.roots,
            })
            .collect();
        self.pairs.remove(skip);
        let res = self.advance_to(g).map(|_| {
            self.pairs
                .iter()
                .flat_map(|p| [p.roots.0, p.roots.1])
                .collect::<Vec<_>>()
        });
        self.pairs = saved;
        res
    }
}

/// Independent spectra for each g′ (parallel, output in input order).
pub fn sweep_spectrum<T: Real>(g_values: &[T], k_max: usize) -> Result<SpectrumSweep<T>> {
    let spectra: Vec<Spectrum<T>> = g_values
        .par_iter()
        .map(|&g| solve_spectrum(g, k_max))
        .collect::<Result<_>>()?;
    Ok(SpectrumSweep {
        g_values: g_values.to_vec(),
        phase_label: spectra.iter().map(|s| s.phase).collect(),
        eigenvalues: spectra.into_iter().map(|s| s.q).collect(),
    })
}
