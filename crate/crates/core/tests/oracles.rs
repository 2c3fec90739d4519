//! Library solvers against independent oracles.

mod common;

use common::{bessel_series, bessel_series_zero, fd_eigenvalue_extrapolated};
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use torrey_lab::eigen::{ep_location, solve_spectrum};
use torrey_lab::model::PhysicalConfig;
use torrey_lab::perturbation::{gradient_relaxation, s0_perturbative, FieldGrid, PerturbationOptions};
use torrey_lab::special::{bessel_j, bessel_j_zero};

#[test]
fn shooting_agrees_with_finite_difference_determinant() {
    for g in [0.3, 1.5, 3.0, 4.5] {
        let s = solve_spectrum::<f64>(g, 3).unwrap();
        for (k, q) in s.q.iter().enumerate() {
            let fd = fd_eigenvalue_extrapolated(g, *q);
            let err = (fd - q).norm() / q.norm().max(1.0);
            assert!(err < 1e-6, "g'={g} k={k}: shooting {q} vs fd {fd}");
        }
    }
}

#[test]
fn zero_gradient_fd_oracle_is_the_cosine_spectrum() {
    for n in 1..4 {
        let exact = (n as f64 * std::f64::consts::FRAC_PI_2).powi(2);
        let fd = fd_eigenvalue_extrapolated(0.0, C::new(exact * 1.01, 0.0));
        assert!((fd.re - exact).abs() < 1e-8 * exact, "{n}: {fd}");
    }
}

#[test]
fn bessel_matches_power_series() {
    for nu in [-2.0 / 3.0, 0.0, 1.0 / 3.0, 1.5] {
        for x in [0.2, 0.9, 2.5, 4.0, 7.5] {
            let a: f64 = bessel_j(nu, x);
            let b = bessel_series(nu, x);
            assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()), "J_{nu}({x}): {a} vs {b}");
        }
    }
}

#[test]
fn bessel_zeros_and_exceptional_points_from_the_series() {
    for p in 1..=3 {
        let z: f64 = bessel_j_zero(-2.0 / 3.0, p).unwrap();
        let oracle = bessel_series_zero(-2.0 / 3.0, p);
        assert!((z - oracle).abs() < 1e-10, "zero {p}: {z} vs {oracle}");
        let (g, q) = ep_location::<f64>(p).unwrap();
        let g_oracle = 27.0 * 3f64.sqrt() / 32.0 * oracle * oracle;
        assert!((g - g_oracle).abs() < 1e-9 * g_oracle);
        assert!((q - g_oracle / 3f64.sqrt()).abs() < 1e-9 * g_oracle);
    }
}

#[test]
fn linear_field_second_order_reproduces_gradient_relaxation() {
    let cfg = PhysicalConfig::<f64>::xe129().with_gradient(30.0);
    let field = FieldGrid::from_fn([65, 65, 65], cfg.cell_length, |_, _, z| cfg.gradient * z);
    let s0 = s0_perturbative(&cfg, &field, PerturbationOptions::default()).unwrap();
    let closed = gradient_relaxation(&cfg);
    assert!(s0.b00.abs() < 1e-12, "b00 = {}", s0.b00);
    assert!(s0.first.norm() < 1e-12);
    assert!(s0.second.im.abs() < 1e-15);
    let rel = (s0.second.re - closed).abs() / closed;
    assert!(rel < 1e-3, "second order {} vs closed form {closed} ({rel:e})", s0.second.re);
}

#[test]
fn isotopes_with_different_walls_see_different_first_order_fields() {
    let base = PhysicalConfig::<f64>::xe129();
    let a = PhysicalConfig { wall_lambda: 0.01, ..base };
    let b = PhysicalConfig { wall_lambda: 0.03, ..PhysicalConfig::xe131() };
    let field = FieldGrid::from_fn([65, 65, 65], base.cell_length, |x, y, z| 5.0 + 2.0 * x * x + 3.0 * y * z * z);
    let sa = s0_perturbative(&a, &field, PerturbationOptions::default()).unwrap();
    let sb = s0_perturbative(&b, &field, PerturbationOptions::default()).unwrap();
    assert!((sa.b00 - sb.b00).abs() > 1e-4, "{} vs {}", sa.b00, sb.b00);
}

#[test]
fn exact_amplitude_ratio_matches_finite_difference_modes() {
    let base = PhysicalConfig::<f64>::xe129();
    for z_p in [-0.174, -0.056] {
        for g_prime in [1.0, 3.0, 6.0] {
            let cfg = base.with_gradient(base.gradient_for_g_prime(g_prime));
            let zeta = 2.0 * z_p / base.cell_length;
            let s = solve_spectrum::<f64>(g_prime, 1).unwrap();
            let a: Vec<f64> = s.q[..2].iter().map(|q| common::fd_mode_amplitude(g_prime, *q, 4001, zeta)).collect();
            let oracle = a[0].min(a[1]) / a[0].max(a[1]);
            let eta: f64 = torrey_lab::fid::eta_exact(&cfg, z_p).unwrap();
            assert!((eta - oracle).abs() < 1e-4, "z_p={z_p} g'={g_prime}: {eta} vs {oracle}");
        }
    }
}

/// Two retained modes reproduce the closed form; many reproduce the exact
/// pipeline. Whatever separates the two curves is truncation.
#[test]
fn amplitude_ratio_truncation_ladder() {
    let base = PhysicalConfig::<f64>::xe129();
    for z_p in [-0.174, -0.056] {
        let zeta = 2.0 * z_p / base.cell_length;
        for g_prime in [2.6, 4.0, 8.0] {
            let g = torrey_lab::eigen::coupling_from_g_prime(g_prime);
            let z01 = 4.0 * 2f64.sqrt() / PI.powi(2);
            let half = PI * PI / 8.0;
            let root = C::new(half * half - (g_prime * z01).powi(2), 0.0).sqrt();
            let two: Vec<f64> = [half + root, half - root]
                .iter()
                .map(|q| common::galerkin_mode_amplitude(g_prime, 2, *q, zeta))
                .collect();
            let closed: f64 = torrey_lab::fid::eta_two_mode(g, z_p, base.cell_length).unwrap();
            let eta2 = two[0].min(two[1]) / two[0].max(two[1]);
            assert!((eta2 - closed).abs() < 1e-9, "2 modes at g'={g_prime}: {eta2} vs {closed}");

            let s = solve_spectrum::<f64>(g_prime, 1).unwrap();
            let many: Vec<f64> = s.q[..2].iter().map(|q| common::galerkin_mode_amplitude(g_prime, 80, *q, zeta)).collect();
            let eta_n = many[0].min(many[1]) / many[0].max(many[1]);
            let cfg = base.with_gradient(base.gradient_for_g_prime(g_prime));
            let exact: f64 = torrey_lab::fid::eta_exact(&cfg, z_p).unwrap();
            assert!((eta_n - exact).abs() < 2e-3, "80 modes at g'={g_prime}: {eta_n} vs {exact}");
        }
    }
}
