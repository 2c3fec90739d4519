//! Independent oracles for the integration and acceptance tests. Nothing
//! here calls into the library's solvers.
#![allow(dead_code)]

use num_complex::Complex64 as C;

/// Root of det(H_h − q) nearest `start`, where H_h is the second-order
/// finite-difference form of −M″ + ig′ζM on n points of [−1, 1] with
/// ghost-point Neumann ends. Newton on the tridiagonal determinant, whose
/// value and q-derivative follow a three-term recurrence.
pub fn fd_eigenvalue(g: f64, n: usize, start: C) -> C {
    let h = 2.0 / (n - 1) as f64;
    let h2 = h * h;
    let mut q = start;
    for _ in 0..60 {
        let diag = |k: usize| C::new(2.0, 0.0) + h2 * (C::new(0.0, g * (-1.0 + h * k as f64)) - q);
        let (mut f2, mut f1) = (C::new(1.0, 0.0), diag(0));
        let (mut d2, mut d1) = (C::new(0.0, 0.0), C::new(-h2, 0.0));
        for k in 1..n {
            let e = if k == 1 || k == n - 1 { 2.0 } else { 1.0 };
            let dk = diag(k);
            let f = dk * f1 - e * f2;
            let d = dk * d1 - h2 * f1 - e * d2;
            (f2, f1, d2, d1) = (f1, f, d1, d);
            let s = f1.norm().max(d1.norm());
            if s > 1e100 {
                f2 /= s;
                f1 /= s;
                d2 /= s;
                d1 /= s;
            }
        }
        let step = f1 / d1;
        q -= step;
        if step.norm() < 1e-15 * q.norm().max(1.0) {
            break;
        }
    }
    q
}

/// Richardson extrapolation of [`fd_eigenvalue`] from h and h/2; the
/// scheme's error is a series in h².
pub fn fd_eigenvalue_extrapolated(g: f64, start: C) -> C {
    let coarse = fd_eigenvalue(g, 1601, start);
    let fine = fd_eigenvalue(g, 3201, coarse);
    (4.0 * fine - coarse) / 3.0
}

/// J_ν(x) from its power series, summed until the terms stop mattering.
pub fn bessel_series(nu: f64, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powf(nu) / statrs::function::gamma::gamma(nu + 1.0);
    let mut sum = term;
    for m in 1..200 {
        let m = m as f64;
        term *= -half * half / (m * (m + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// p-th positive zero of the series J_ν by scanning and bisection.
pub fn bessel_series_zero(nu: f64, p: usize) -> f64 {
    let mut found = 0;
    let mut x = 0.05;
    let step = 0.01;
    loop {
        let (a, b) = (x, x + step);
        if bessel_series(nu, a).signum() != bessel_series(nu, b).signum() {
            found += 1;
            if found == p {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if bessel_series(nu, lo).signum() == bessel_series(nu, mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        x = b;
    }
}

/// Ordinary least-squares line through (x, y): (intercept, slope).
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Amplitude |c·M(ζ_p)| of the finite-difference eigenvector for the
/// eigenvalue nearest `q`, with c the projection of a uniform initial state.
/// Inverse iteration on the tridiagonal; the trapezoid weights make the
/// ghost-point matrix symmetric, so the projection uses that bilinear form.
pub fn fd_mode_amplitude(g: f64, q: C, n: usize, zeta_p: f64) -> f64 {
    let h = 2.0 / (n - 1) as f64;
    let h2 = h * h;
    let shift = q + C::new(1e-9, 1e-9);
    let diag: Vec<C> = (0..n)
        .map(|k| C::new(2.0 / h2, 0.0) + C::new(0.0, g * (-1.0 + h * k as f64)) - shift)
        .collect();
    let upper: Vec<f64> = (0..n - 1).map(|k| if k == 0 { -2.0 / h2 } else { -1.0 / h2 }).collect();
    let lower: Vec<f64> = (1..n).map(|k| if k == n - 1 { -2.0 / h2 } else { -1.0 / h2 }).collect();
    let solve = |rhs: &[C]| {
        let mut c = vec![C::new(0.0, 0.0); n];
        let mut d = vec![C::new(0.0, 0.0); n];
        c[0] = upper[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - lower[i - 1] * c[i - 1];
            if i < n - 1 {
                c[i] = upper[i] / m;
            }
            d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
        }
        let mut x = d.clone();
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    };
    let mut v = vec![C::new(1.0, 0.3); n];
    for _ in 0..4 {
        v = solve(&v);
        let s = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        v.iter_mut().for_each(|z| *z /= s);
    }
    let w = |k: usize| if k == 0 || k == n - 1 { h / 2.0 } else { h };
    let num: C = (0..n).map(|k| v[k] * w(k)).sum();
    let den: C = (0..n).map(|k| v[k] * v[k] * w(k)).sum();
    let x = (zeta_p + 1.0) / h;
    let i = (x.floor() as usize).min(n - 2);
    let f = x - i as f64;
    let at = v[i] * (1.0 - f) + v[i + 1] * f;
    (num / den * at).norm()
}

/// Dense complex solve with partial pivoting.
fn dense_solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: C = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Galerkin truncation of −M″ + ig′ζM on the Neumann cosines
/// φₙ = cₙcos(nπ(ζ+1)/2), n < `modes`. Returns |c·M(ζ_p)| for the
/// eigenvalue nearest `q`, c projecting the uniform state.
pub fn galerkin_mode_amplitude(g: f64, modes: usize, q: C, zeta_p: f64) -> f64 {
    let norm = |n: usize| if n == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
    // ∫₀¹ u cos(kπu) du
    let moment = |k: usize| {
        if k == 0 {
            0.5
        } else {
            let kp = k as f64 * std::f64::consts::PI;
            (if k % 2 == 0 { 1.0 } else { -1.0 } - 1.0) / (kp * kp)
        }
    };
    let mut a = vec![vec![C::new(0.0, 0.0); modes]; modes];
    for m in 0..modes {
        for n in 0..modes {
            if m == n {
                let k = n as f64 * std::f64::consts::FRAC_PI_2;
                a[m][n] = C::new(k * k, 0.0) - q - C::new(1e-10, 1e-10);
            } else {
                let z = 2.0 * norm(m) * norm(n) * (moment(m.abs_diff(n)) + moment(m + n));
                a[m][n] = C::new(0.0, g * z);
            }
        }
    }
    let mut v = vec![C::new(1.0, 0.2); modes];
    for _ in 0..4 {
        v = dense_solve(a.clone(), v);
        let s = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        v.iter_mut().for_each(|z| *z /= s);
    }
    let c = v[0] * 2f64.sqrt() / v.iter().map(|z| z * z).sum::<C>();
    let u = (zeta_p + 1.0) / 2.0;
    let at: C = (0..modes).map(|n| v[n] * norm(n) * (n as f64 * std::f64::consts::PI * u).cos()).sum();
    (c * at).norm()
}
