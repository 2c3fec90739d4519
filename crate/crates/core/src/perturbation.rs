//! Perturbative fundamental-mode eigenvalue in the Robin (wall-relaxing)
//! basis, gradient-induced relaxation and the T₂(G) law.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{physical_eigenvalue, to_dimensionless, ComplexEigenvalue, PhysicalConfig};
use crate::scalar::{lit, Real};

pub const MAX_LAMBDA: f64 = 0.5;
pub const DEFAULT_P_MAX: usize = 50;
pub const MIN_QUADRATURE_POINTS: usize = 65;

/// One-dimensional Robin modes φₚ(z) = sin(κₚz + δₚ)/𝒩ₚ on [−L/2, L/2].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobinModeBasis<T> {
    pub lambda: T,
    pub length: T,
    pub kappa: Vec<T>,
    pub delta: Vec<T>,
    pub norm: Vec<T>,
}

/// (x² − λ²) sin x − 2λx cos x, whose roots are x = κL. Pole free form of
/// tan x = 2λx/(x² − λ²).
fn robin_residual<T: Real>(x: T, lambda: T) -> T {
    (x * x - lambda * lambda) * x.sin() - lit::<T>(2.0) * lambda * x * x.cos()
}

fn robin_residual_dx<T: Real>(x: T, lambda: T) -> T {
    let two = lit::<T>(2.0);
    two * x * x.sin() + (x * x - lambda * lambda) * x.cos() - two * lambda * x.cos()
        + two * lambda * x * x.sin()
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if !lambda.is_finite() || lambda < T::zero() || lambda > lit(MAX_LAMBDA) {
        return Err(Error::InvalidInput(format!(
            "wall lambda must lie in [0, {MAX_LAMBDA}], got {lambda}"
        )));
    }
    Ok(())
}

/// κₚ for branch p (the root nearest pπ/L from above), by Newton iteration
/// safeguarded with bisection.
pub fn solve_kappa<T: Real>(lambda: T, p: usize, length: T) -> Result<T> {
    check_lambda(lambda)?;
    if !(length > T::zero()) {
        return Err(Error::InvalidInput("cell length must be positive".into()));
    }
    let pi = T::PI();
    if lambda == T::zero() {
        return Ok(lit::<T>(p as f64) * pi / length);
    }
    // For p = 0 the residual has a trivial root at x = 0; divide it out.
    let f = |x: T| {
        if p == 0 {
            robin_residual(x, lambda) / x
        } else {
            robin_residual(x, lambda)
        }
    };
    let (mut a, mut b) = if p == 0 {
        (lit::<T>(1e-12), pi / lit(2.0))
    } else {
        let base = lit::<T>(p as f64) * pi;
        (base, base + pi / lit(2.0))
    };
    let mut fa = f(a);
    let fb = f(b);
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!("Robin branch p={p}, lambda={lambda}")));
    }
    let mut x = if p == 0 {
        (lit::<T>(2.0) * lambda + lambda * lambda).sqrt().min(b * lit(0.9))
    } else {
        a + lit::<T>(2.0) * lambda / a
    };
    for _ in 0..200 {
        let fx = f(x);
        if fx == T::zero() {
            break;
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        let d = if p == 0 {
            (robin_residual_dx(x, lambda) - fx) / x
        } else {
            robin_residual_dx(x, lambda)
        };
        let newton = x - fx / d;
        let next = if newton > a && newton < b && d != T::zero() {
            newton
        } else {
            (a + b) / lit(2.0)
        };
        if (next - x).abs() <= T::epsilon() * lit::<T>(4.0) * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x / length)
}

impl<T: Real> RobinModeBasis<T> {
    /// Modes p = 0..=p_max.
    pub fn new(lambda: T, length: T, p_max: usize) -> Result<Self> {
        check_lambda(lambda)?;
        let mut kappa = Vec::with_capacity(p_max + 1);
        let mut delta = Vec::with_capacity(p_max + 1);
        let mut norm = Vec::with_capacity(p_max + 1);
        let half = lit::<T>(0.5);
        for p in 0..=p_max {
            let k = solve_kappa(lambda, p, length)?;
            let x = k * length;
            let d = if lambda == T::zero() {
                x * half + T::FRAC_PI_2()
            } else {
                x * half + (x / lambda).atan()
            };
            let n = if lambda == T::zero() && p == 0 {
                length.sqrt()
            } else {
                (length * half + lambda * length / (x * x + lambda * lambda)).sqrt()
            };
            kappa.push(k);
            delta.push(d);
            norm.push(n);
        }
        Ok(Self {
            lambda,
            length,
            kappa,
            delta,
            norm,
        })
    }

    pub fn eval(&self, p: usize, z: T) -> T {
        (self.kappa[p] * z + self.delta[p]).sin() / self.norm[p]
    }

    /// |tan(κL) − 2λκL/(κ²L² − λ²)| for mode p.
    pub fn residual(&self, p: usize) -> T {
        let x = self.kappa[p] * self.length;
        let l = self.lambda;
        (x.tan() - lit::<T>(2.0) * l * x / (x * x - l * l)).abs()
    }
}

/// Γ₀₀₀ = 3Dκ₀², the wall relaxation of the fundamental mode of the cube.
pub fn wall_relaxation<T: Real>(lambda: T, config: &PhysicalConfig<T>) -> Result<T> {
    let k0 = solve_kappa(lambda, 0, config.cell_length)?;
    Ok(lit::<T>(3.0) * config.diffusion * k0 * k0)
}

/// Small-λ approximation 6λD/L².
pub fn wall_relaxation_approx<T: Real>(lambda: T, config: &PhysicalConfig<T>) -> T {
    lit::<T>(6.0) * lambda * config.diffusion / config.cell_length.powi(2)
}

/// b₀,αₚ = 2√2·G·L/((2p−1)²π²) for the odd modes αₚ = [0, 0, 2p−1], p ≥ 1.
pub fn gradient_coupling<T: Real>(p: usize, gradient: T, length: T) -> Result<T> {
    if p == 0 {
        return Err(Error::InvalidInput("gradient coupling index starts at 1".into()));
    }
    let n = lit::<T>((2 * p - 1) as f64);
    Ok(lit::<T>(2.0 * 2f64.sqrt()) * gradient * length / (n * n * T::PI() * T::PI()))
}

/// Coupling of the fundamental mode to the Neumann mode with z index n:
/// zero for even n by parity, [`gradient_coupling`] for odd n.
pub fn gradient_coupling_mode<T: Real>(n: usize, gradient: T, length: T) -> T {
    if n % 2 == 0 {
        T::zero()
    } else {
        gradient_coupling((n + 1) / 2, gradient, length).unwrap_or_else(|_| T::zero())
    }
}

/// Γ_G = γ²G²L⁴/(120D).
pub fn gradient_relaxation<T: Real>(config: &PhysicalConfig<T>) -> T {
    let g = config.gamma * config.gradient;
    g * g * config.cell_length.powi(4) / (lit::<T>(120.0) * config.diffusion)
}

/// Σ_{p ≤ p_max} γ²b₀,αₚ²/(Dκ²_{2p−1}), the partial sums of Γ_G.
pub fn gradient_relaxation_partial_sums<T: Real>(config: &PhysicalConfig<T>, p_max: usize) -> Vec<T> {
    let mut acc = T::zero();
    (1..=p_max)
        .map(|p| {
            let b = gradient_coupling(p, config.gradient, config.cell_length).unwrap_or_else(|_| T::zero());
            let k = lit::<T>((2 * p - 1) as f64) * T::PI() / config.cell_length;
            acc += config.gamma * config.gamma * b * b / (config.diffusion * k * k);
            acc
        })
        .collect()
}

/// 1/T₂ = Γ₂,min + γ²G²L⁴/(120D); returns T₂ for each gradient.
pub fn t2_curve<T: Real>(config: &PhysicalConfig<T>, gamma2min: T, gradients: &[T]) -> Result<Vec<T>> {
    if !(gamma2min > T::zero()) {
        return Err(Error::InvalidInput("gamma2min must be positive".into()));
    }
    Ok(gradients
        .iter()
        .map(|&g| T::one() / (gamma2min + gradient_relaxation(&config.with_gradient(g))))
        .collect())
}

/// Result of fitting measured T₂(G) with the quadratic relaxation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T2Fit<T> {
    pub gamma2min: T,
    pub gamma2min_se: T,
    /// Curvature c of 1/T₂ = Γ₂,min + cG², s⁻¹·(nT/cm)⁻².
    pub curvature: T,
    pub curvature_se: T,
    pub diffusion: T,
    pub diffusion_se: T,
}

/// Weighted least squares of 1/T₂ against G², with D = γ²L⁴/(120c). The
/// T₂ uncertainties are propagated to the rates as σ/T₂².
pub fn fit_t2_curve<T: Real>(
    gamma: T,
    length: T,
    gradients: &[T],
    t2: &[T],
    t2_sigma: &[T],
) -> Result<T2Fit<T>> {
    let n = gradients.len();
    if n < 3 || t2.len() != n || t2_sigma.len() != n {
        return Err(Error::InvalidInput("T2 fit needs >= 3 matching points".into()));
    }
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..n {
        if !(t2[i] > T::zero()) || !(t2_sigma[i] > T::zero()) {
            return Err(Error::InvalidInput("T2 values and sigmas must be positive".into()));
        }
        let x = gradients[i] * gradients[i];
        let y = T::one() / t2[i];
        let s = t2_sigma[i] / (t2[i] * t2[i]);
        let w = T::one() / (s * s);
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if !(det.abs() > T::epsilon() * sw * sxx) {
        return Err(Error::RankDeficient("gradients do not vary".into()));
    }
    let c = (sw * sxy - sx * sy) / det;
    let a = (sxx * sy - sx * sxy) / det;
    let c_se = (sw / det).sqrt();
    let a_se = (sxx / det).sqrt();
    let d = gamma * gamma * length.powi(4) / (lit::<T>(120.0) * c);
    Ok(T2Fit {
        gamma2min: a,
        gamma2min_se: a_se,
        curvature: c,
        curvature_se: c_se,
        diffusion: d,
        diffusion_se: d * c_se / c.abs(),
    })
}

/// B₁ sampled on a uniform tensor grid over the cube [−L/2, L/2]³, stored
/// with z fastest: `values[(ix * ny + iy) * nz + iz]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid<T> {
    pub shape: [usize; 3],
    pub values: Vec<T>,
}

impl<T: Real> FieldGrid<T> {
    pub fn from_fn(shape: [usize; 3], length: T, f: impl Fn(T, T, T) -> T) -> Self {
        let coord = |i: usize, n: usize| -length / lit(2.0) + length * lit::<T>(i as f64) / lit::<T>((n - 1) as f64);
        let mut values = Vec::with_capacity(shape[0] * shape[1] * shape[2]);
        for ix in 0..shape[0] {
            for iy in 0..shape[1] {
                for iz in 0..shape[2] {
                    values.push(f(coord(ix, shape[0]), coord(iy, shape[1]), coord(iz, shape[2])));
                }
            }
        }
        Self { shape, values }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PerturbationOptions {
    pub p_max: usize,
    /// Largest allowed |last-shell contribution| / |second order|.
    pub tail_tol: f64,
}

impl Default for PerturbationOptions {
    fn default() -> Self {
        Self {
            p_max: DEFAULT_P_MAX,
            tail_tol: 1e-3,
        }
    }
}

/// s₀ split into its perturbative orders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeEigenvalue<T> {
    pub eigenvalue: ComplexEigenvalue<T>,
    pub zeroth: Complex<T>,
    pub first: Complex<T>,
    pub second: Complex<T>,
    /// b₀₀, nT.
    pub b00: T,
    /// Contribution of the outermost retained mode shell to the second order.
    pub tail: T,
}

fn axis_table<T: Real>(basis: &RobinModeBasis<T>, n: usize, length: T) -> (Vec<T>, Vec<Vec<T>>) {
    let h = length / lit::<T>((n - 1) as f64);
    let mut w = vec![h; n];
    w[0] = h / lit(2.0);
    w[n - 1] = h / lit(2.0);
    let z: Vec<T> = (0..n).map(|i| -length / lit(2.0) + h * lit::<T>(i as f64)).collect();
    let table = (0..basis.kappa.len())
        .map(|p| z.iter().map(|&zi| basis.eval(p, zi)).collect())
        .collect();
    (w, table)
}

/// s₀ = 3Dκ₀² + Γ₂c + iγB₀ + iγb₀₀ + γ²Σ_α b₀α²/(D(κα² − κ₀²)), with
/// b₀α = ∫φ₀B₁φα d³r by tensor trapezoid quadrature over modes up to
/// `p_max` per axis.
pub fn s0_perturbative<T: Real>(
    config: &PhysicalConfig<T>,
    field: &FieldGrid<T>,
    opts: PerturbationOptions,
) -> Result<PerturbativeEigenvalue<T>> {
    let problem = to_dimensionless(config)?;
    let [nx, ny, nz] = field.shape;
    if nx.min(ny).min(nz) < MIN_QUADRATURE_POINTS || field.values.len() != nx * ny * nz {
        return Err(Error::InvalidInput(format!(
            "field grid must be at least {MIN_QUADRATURE_POINTS}^3 and match its shape"
        )));
    }
    if field.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("field profile"));
    }
    let l = config.cell_length;
    let basis = RobinModeBasis::new(config.wall_lambda, l, opts.p_max)?;
    let m = basis.kappa.len();
    let (wx, tx) = axis_table(&basis, nx, l);
    let (wy, ty) = axis_table(&basis, ny, l);
    let (wz, tz) = axis_table(&basis, nz, l);

    // contract x: c1[a][iy][iz]
    let c1: Vec<Vec<T>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut out = vec![T::zero(); ny * nz];
            for ix in 0..nx {
                let f = wx[ix] * tx[0][ix] * tx[a][ix];
                let row = &field.values[ix * ny * nz..(ix + 1) * ny * nz];
                for (o, v) in out.iter_mut().zip(row) {
                    *o += f * *v;
                }
            }
            out
        })
        .collect();
    // contract y: c2[a][b][iz]
    let c2: Vec<Vec<Vec<T>>> = c1
        .par_iter()
        .map(|plane| {
            (0..m)
                .map(|b| {
                    let mut out = vec![T::zero(); nz];
                    for iy in 0..ny {
                        let f = wy[iy] * ty[0][iy] * ty[b][iy];
                        for (o, v) in out.iter_mut().zip(&plane[iy * nz..(iy + 1) * nz]) {
                            *o += f * *v;
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    let coupling = |a: usize, b: usize, c: usize| -> T {
        let mut s = T::zero();
        for iz in 0..nz {
            s += wz[iz] * tz[0][iz] * tz[c][iz] * c2[a][b][iz];
        }
        s
    };

    let k2: Vec<T> = basis.kappa.iter().map(|k| *k * *k).collect();
    let k0 = lit::<T>(3.0) * k2[0];
    let d = config.diffusion;
    let gamma = config.gamma;
    let b00 = coupling(0, 0, 0);
    let mut second = T::zero();
    let mut tail = T::zero();
    let scale_tol = T::epsilon() * lit(1e3) * k0.max(k2[1]);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                if a + b + c == 0 {
                    continue;
                }
                let gap = k2[a] + k2[b] + k2[c] - k0;
                let bb = coupling(a, b, c);
                if gap.abs() <= scale_tol {
                    if bb != T::zero() {
                        return Err(Error::DegenerateModes);
                    }
                    continue;
                }
                let term = gamma * gamma * bb * bb / (d * gap);
                second += term;
                if a == m - 1 || b == m - 1 || c == m - 1 {
                    tail += term;
                }
            }
        }
    }
    let zeroth = problem.constant_shift + Complex::new(d * k0, T::zero());
    let first = Complex::new(T::zero(), gamma * b00);
    let second_c = Complex::new(second, T::zero());
    if second != T::zero() && (tail / second).abs() > lit(opts.tail_tol) {
        return Err(Error::CutoffTooSmall {
            tail: tail.as_f64(),
            tol: opts.tail_tol,
        });
    }
    let s = zeroth + first + second_c;
    let q = (s - problem.constant_shift) / problem.eigen_scale;
    Ok(PerturbativeEigenvalue {
        eigenvalue: physical_eigenvalue(&problem, q),
        zeroth,
        first,
        second: second_c,
        b00,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> PhysicalConfig<f64> {
        PhysicalConfig::xe129()
    }

    #[test]
    fn neumann_limit() {
        assert_eq!(solve_kappa(0.0_f64, 1, 0.8).unwrap(), PI / 0.8);
        let b = RobinModeBasis::new(0.0_f64, 0.8, 3).unwrap();
        assert!((b.eval(0, 0.1) - 1.0 / 0.8f64.sqrt()).abs() < 1e-15);
        assert!((b.eval(1, 0.1) + (2.0 / 0.8f64).sqrt() * (PI * 0.1 / 0.8).sin()).abs() < 1e-14);
    }

    #[test]
    fn robin_roots_satisfy_transcendental_equation() {
        let b = RobinModeBasis::new(0.01_f64, 0.8, 20).unwrap();
        for p in 0..=20 {
            assert!(b.residual(p) < 1e-10, "p={p} residual {}", b.residual(p));
            assert!(b.kappa[p] * 0.8 >= p as f64 * PI);
        }
    }

    #[test]
    fn small_lambda_expansions() {
        let l = 0.8;
        let k0 = solve_kappa(0.01_f64, 0, l).unwrap();
        let approx0 = (2.0 * 0.01 + 0.01f64.powi(2)).sqrt() / l;
        assert!((k0 / approx0 - 1.0).abs() < 1e-2);
        let k2 = solve_kappa(0.01_f64, 2, l).unwrap();
        let approx2 = (2.0 * PI + 2.0 * 0.01 / (2.0 * PI)) / l;
        assert!((k2 / approx2 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn robin_modes_are_orthonormal_and_satisfy_wall_condition() {
        let lambda = 0.05;
        let l = 0.8;
        let b = RobinModeBasis::new(lambda, l, 4).unwrap();
        let n = 4001;
        let h = l / (n - 1) as f64;
        for p in 0..4 {
            for q in 0..4 {
                let mut s = 0.0;
                for i in 0..n {
                    let z = -l / 2.0 + h * i as f64;
                    let w = if i == 0 || i == n - 1 { h / 2.0 } else { h };
                    s += w * b.eval(p, z) * b.eval(q, z);
                }
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-6, "p={p} q={q} {s}");
            }
            let dz = 1e-6;
            let z = l / 2.0;
            let deriv = (b.eval(p, z + dz) - b.eval(p, z - dz)) / (2.0 * dz);
            assert!((lambda / l * b.eval(p, z) + deriv).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_large_lambda() {
        assert!(solve_kappa(0.6_f64, 0, 0.8).is_err());
    }

    #[test]
    fn wall_relaxation_values() {
        assert_eq!(wall_relaxation(0.0, &cfg()).unwrap(), 0.0);
        let approx = wall_relaxation_approx(0.01, &cfg());
        assert!((approx - 1.978125e-2).abs() < 1e-8);
        let exact = wall_relaxation(0.01, &cfg()).unwrap();
        assert!((exact / approx - 1.0).abs() < 0.01);
    }

    #[test]
    fn coupling_values() {
        let b = gradient_coupling(1, 100.0_f64, 0.8).unwrap();
        assert!((b - 22.93).abs() < 0.01);
        assert_eq!(gradient_coupling_mode(2, 100.0_f64, 0.8), 0.0);
        assert!(gradient_coupling(1000, 100.0_f64, 0.8).unwrap() < 1e-4);
    }

    #[test]
    fn coupling_matches_direct_quadrature() {
        let l = 0.8;
        let basis = RobinModeBasis::new(0.0_f64, l, 5).unwrap();
        let n = 20001;
        let h = l / (n - 1) as f64;
        for k in 1..=5 {
            let mut s = 0.0;
            for i in 0..n {
                let z = -l / 2.0 + h * i as f64;
                let w = if i == 0 || i == n - 1 { h / 2.0 } else { h };
                s += w * z * basis.eval(0, z) * basis.eval(k, z);
            }
            assert!((s.abs() - gradient_coupling_mode(k, 1.0, l)).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn mode_sum_converges_monotonically_to_closed_form() {
        let c = cfg().with_gradient(50.0);
        let sums = gradient_relaxation_partial_sums(&c, 100);
        assert!(sums.windows(2).all(|w| w[1] >= w[0]));
        let closed = gradient_relaxation(&c);
        assert!((sums[99] / closed - 1.0).abs() < 1e-6);
    }

    #[test]
    fn t2_curve_at_zero_gradient() {
        let t = t2_curve(&cfg(), 0.4, &[0.0, 10.0]).unwrap();
        assert_eq!(t[0], 2.5);
        assert!(t[1] < 2.5);
    }

    #[test]
    fn uniform_zero_field_gives_zeroth_order() {
        let c = cfg();
        let f = FieldGrid::from_fn([65, 65, 65], 0.8, |_, _, _| 0.0);
        let r = s0_perturbative(&c, &f, PerturbationOptions::default()).unwrap();
        assert_eq!(r.first, Complex::new(0.0, 0.0));
        assert_eq!(r.second, Complex::new(0.0, 0.0));
        assert!((r.eigenvalue.decay - c.gamma_collision).abs() < 1e-14);
    }

    #[test]
    fn rejects_coarse_grid() {
        let f = FieldGrid::from_fn([33, 65, 65], 0.8, |_, _, z| z);
        assert!(s0_perturbative(&cfg(), &f, PerturbationOptions::default()).is_err());
    }
}
