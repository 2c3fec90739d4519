//! Small dense linear algebra for normal equations and 3×3 systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Matrix<T> = Vec<Vec<T>>;

/// Lower Cholesky factor of a symmetric positive definite matrix, or `None`
/// when a pivot falls below `rel_tol` times the largest diagonal entry.
pub fn cholesky<T: Real>(a: &Matrix<T>, rel_tol: T) -> Option<Matrix<T>> {
    let n = a.len();
    let dmax = (0..n).map(|i| a[i][i].abs()).fold(T::zero(), T::max);
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > rel_tol * dmax) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

pub fn cholesky_solve<T: Real>(l: &Matrix<T>, b: &[T]) -> Vec<T> {
    let n = l.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Inverse of an SPD matrix through its Cholesky factor.
pub fn spd_inverse<T: Real>(a: &Matrix<T>, rel_tol: T) -> Option<Matrix<T>> {
    let l = cholesky(a, rel_tol)?;
    let n = a.len();
    let mut inv = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = cholesky_solve(&l, &e);
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Gaussian elimination with partial pivoting.
pub fn solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Result<Vec<T>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("matrix and right-hand side sizes differ".into()));
    }
    let scale = a.iter().flatten().map(|v| v.abs()).fold(T::zero(), T::max);
    let mut m: Matrix<T> = a.to_vec();
    let mut x: Vec<T> = b.to_vec();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(c);
        if !(m[p][c].abs() > T::epsilon() * scale) {
            return Err(Error::NumericFailure("singular matrix".into()));
        }
        m.swap(c, p);
        x.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                let v = m[c][k];
                m[r][k] -= f * v;
            }
            let v = x[c];
            x[r] -= f * v;
        }
    }
    for c in (0..n).rev() {
        let mut s = x[c];
        for k in c + 1..n {
            s -= m[c][k] * x[k];
        }
        x[c] = s / m[c][c];
    }
    Ok(x)
}

pub fn inverse<T: Real>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.len();
    let mut inv = vec![vec![T::zero(); n]; n];
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        let col = solve(a, &e)?;
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Ok(inv)
}

fn norm1<T: Real>(a: &Matrix<T>) -> T {
    let n = a.len();
    (0..n)
        .map(|j| a.iter().map(|r| r[j].abs()).sum::<T>())
        .fold(T::zero(), T::max)
}

/// κ₁(A) = ‖A‖₁‖A⁻¹‖₁.
pub fn condition_number<T: Real>(a: &Matrix<T>) -> Result<T> {
    Ok(norm1(a) * norm1(&inverse(a)?))
}

pub fn det3<T: Real>(a: &Matrix<T>) -> T {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn mat_vec<T: Real>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| *p * *q).sum()).collect()
}
