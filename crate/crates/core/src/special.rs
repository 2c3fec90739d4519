//! Bessel functions of the first kind for real order, and their zeros.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const SERIES_LIMIT: f64 = 12.0;

/// J_ν(x) for real ν and x > 0.
///
/// Ascending series below x = 12, Hankel asymptotic expansion above.
pub fn bessel_j<T: Real>(nu: T, x: T) -> T {
    if x <= T::zero() {
        return T::nan();
    }
    if x < lit(SERIES_LIMIT) {
        series(nu, x)
    } else {
        asymptotic(nu, x)
    }
}

fn series<T: Real>(nu: T, x: T) -> T {
    let half = x / lit(2.0);
    let g = lit::<T>(statrs::function::gamma::gamma((nu + T::one()).as_f64()));
    // m = 0 term: (x/2)^ν / Γ(ν+1)
    let mut term = half.powf(nu) / g;
    let mut sum = term;
    let q = -half * half;
    for m in 1..200 {
        let mf = lit::<T>(m as f64);
        term = term * q / (mf * (mf + nu));
        sum += term;
        if term.abs() <= T::epsilon() * sum.abs() * lit(0.1) {
            break;
        }
    }
    sum
}

fn asymptotic<T: Real>(nu: T, x: T) -> T {
    let mu = lit::<T>(4.0) * nu * nu;
    let eight_x = lit::<T>(8.0) * x;
    let mut p = T::one();
    let mut q = T::zero();
    let mut term = T::one();
    let mut last = T::infinity();
    for k in 1..60 {
        let kf = lit::<T>((2 * k - 1) as f64);
        term = term * (mu - kf * kf) / (lit::<T>(k as f64) * eight_x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < T::epsilon() {
            break;
        }
    }
    let chi = x - (nu / lit(2.0) + lit(0.25)) * T::PI();
    (lit::<T>(2.0) / (T::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// The `p`-th positive zero (p ≥ 1) of J_ν, by scanning for a sign change
/// and bisecting.
pub fn bessel_j_zero<T: Real>(nu: T, p: usize) -> Result<T> {
    if p == 0 {
        return Err(Error::InvalidInput("zero index starts at 1".into()));
    }
    let step = lit::<T>(0.05);
    let mut a = lit::<T>(1e-3);
    let mut fa = bessel_j(nu, a);
    let mut found = 0;
    let limit = lit::<T>(8.0 + 4.0 * p as f64);
    while a < limit {
        let b = a + step;
        let fb = bessel_j(nu, b);
        if fa.signum() != fb.signum() {
            found += 1;
            if found == p {
                return Ok(bisect(|x| bessel_j(nu, x), a, b, fa));
            }
        }
        a = b;
        fa = fb;
    }
    Err(Error::BracketFailure(format!("zero #{p} of J_{nu}")))
}

fn bisect<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, mut fa: T) -> T {
    for _ in 0..200 {
        let m = (a + b) / lit(2.0);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == T::zero() {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) / lit(2.0)
}
