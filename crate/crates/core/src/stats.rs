//! Summary statistics shared by the fitters and the benchmark.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::scalar::{lit, Real};

/// Two-sided 95% Student-t quantile t₀.₉₇₅ at `dof` degrees of freedom.
pub fn t975(dof: usize) -> f64 {
    t_quantile(0.975, dof)
}

/// Student-t quantile at probability `p`; infinite for zero dof.
pub fn t_quantile(p: f64, dof: usize) -> f64 {
    if dof == 0 {
        return f64::INFINITY;
    }
    StudentsT::new(0.0, 1.0, dof as f64)
        .map(|d| d.inverse_cdf(p))
        .unwrap_or(f64::INFINITY)
}

/// Standard normal quantile.
pub fn z_quantile(p: f64) -> f64 {
    statrs::distribution::Normal::standard().inverse_cdf(p)
}

/// Compensated (Neumaier) sum, independent of chunking.
pub fn stable_sum<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut c = T::zero();
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn mean<T: Real>(xs: &[T]) -> T {
    stable_sum(xs.iter().copied()) / lit::<T>(xs.len() as f64)
}

/// Sample standard deviation with N − 1 normalization.
pub fn std_dev<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::nan();
    }
    let m = mean(xs);
    (stable_sum(xs.iter().map(|x| (*x - m) * (*x - m))) / lit::<T>((xs.len() - 1) as f64)).sqrt()
}

/// Smallest value F such that at least a fraction `q` of `xs` are ≤ F.
pub fn coverage_quantile<T: Real>(xs: &[T], q: f64) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    let mut v: Vec<T> = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let k = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

/// Ordinary least squares y = a + b·x with standard errors of a and b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit<T> {
    pub intercept: T,
    pub slope: T,
    pub intercept_se: T,
    pub slope_se: T,
}

pub fn linear_fit<T: Real>(x: &[T], y: &[T]) -> Option<LinearFit<T>> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let sxx = stable_sum(x.iter().map(|v| (*v - mx) * (*v - mx)));
    if !(sxx > T::zero()) || sxx <= T::epsilon() * stable_sum(x.iter().map(|v| *v * *v)) {
        return None;
    }
    let sxy = stable_sum(x.iter().zip(y).map(|(a, b)| (*a - mx) * (*b - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = stable_sum(x.iter().zip(y).map(|(a, b)| {
        let r = *b - intercept - slope * *a;
        r * r
    }));
    let s2 = rss / lit::<T>((n - 2) as f64);
    let nf = lit::<T>(n as f64);
    Some(LinearFit {
        intercept,
        slope,
        intercept_se: (s2 * (T::one() / nf + mx * mx / sxx)).sqrt(),
        slope_se: (s2 / sxx).sqrt(),
    })
}
