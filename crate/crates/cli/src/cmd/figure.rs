use rayon::prelude::*;
use torrey_lab::bench::truth_params;
use torrey_lab::eigen::{coupling_from_g_prime, ep_location, eigenmode, pt_symmetry_metrics, solve_spectrum, sweep_spectrum, Phase};
use torrey_lab::fid::{eta_exact, eta_two_mode, exact_mode_amplitudes, phase_difference, phase_shift_convention};
use torrey_lab::model::{physical_eigenvalue, to_dimensionless, ComplexEigenvalue, PhysicalConfig};
use torrey_lab::wrap_angle;

use super::{hz, linspace};
use crate::failure::CliResult;
use crate::output::{num, Ctx, Table};
use crate::{FigureArgs, FigureId};

/// Probe positions of the amplitude-ratio curves, cm.
pub const FIG2_Z_P: [f64; 2] = [-0.174, -0.056];

fn range(a: &FigureArgs, lo: f64, hi: f64, steps: usize) -> CliResult<Vec<f64>> {
    linspace(a.min.unwrap_or(lo), a.max.unwrap_or(hi), a.steps.unwrap_or(steps))
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), num)
}

/// Index of the "+" mode: larger signed frequency when broken, faster decay
/// otherwise.
fn plus_index(s: &[ComplexEigenvalue<f64>; 2], broken: bool) -> usize {
    let key = |e: &ComplexEigenvalue<f64>| if broken { e.frequency } else { e.decay };
    if key(&s[1]) > key(&s[0]) { 1 } else { 0 }
}

fn fig2_row(cfg: &PhysicalConfig<f64>, z_p: f64) -> CliResult<Vec<String>> {
    let gp = cfg.g_prime();
    let g = coupling_from_g_prime(gp);
    let broken = solve_spectrum(gp, 1)?.phase != Phase::Symmetric;
    let modes = exact_mode_amplitudes(cfg, z_p, 1)?;
    let p = plus_index(&[modes[0].eigenvalue, modes[1].eigenvalue], broken);
    let dtheta = wrap_angle(modes[p].theta - modes[1 - p].theta);
    let dtheta_exact = phase_shift_convention(dtheta, broken, cfg.gradient);
    let (eta2, dtheta2) = if g.abs() > 1.0 {
        let d = phase_difference(g, z_p, cfg.cell_length, 0.0, 0.0)?;
        (Some(eta_two_mode(g, z_p, cfg.cell_length)?), Some(phase_shift_convention(d, true, cfg.gradient)))
    } else {
        (None, None)
    };
    Ok(vec![
        num(z_p),
        num(cfg.gradient),
        num(gp),
        num(g),
        num(eta_exact(cfg, z_p)?),
        opt(eta2),
        num(dtheta_exact),
        opt(dtheta2),
    ])
}

fn fig3_row(cfg: &PhysicalConfig<f64>) -> CliResult<Vec<String>> {
    let problem = to_dimensionless(cfg)?;
    let s = solve_spectrum(problem.g_prime, 1)?;
    let e = [physical_eigenvalue(&problem, s.q[0]), physical_eigenvalue(&problem, s.q[1])];
    let p = plus_index(&e, s.phase != Phase::Symmetric);
    let (a, b) = (e[p], e[1 - p]);
    Ok(vec![
        num(cfg.gradient),
        num(problem.g_prime),
        s.phase.label().into(),
        num(a.decay),
        num(b.decay),
        num(hz(a.frequency)),
        num(hz(b.frequency)),
    ])
}

fn collect_rows(rows: Vec<CliResult<Vec<String>>>, t: &mut Table) -> CliResult<()> {
    for r in rows {
        t.push(r?);
    }
    Ok(())
}

pub fn run(ctx: &Ctx, a: FigureArgs) -> CliResult<()> {
    let base = ctx.config.physical.selected();
    match a.id {
        FigureId::Fig2Theory => {
            let grads = range(&a, -250.0, 250.0, 100)?;
            let mut t = Table::new(&[
                "z_p_cm",
                "gradient_nt_cm",
                "g_prime",
                "g",
                "eta_exact",
                "eta_two_mode",
                "delta_theta_exact",
                "delta_theta_two_mode",
            ]);
            for z in FIG2_Z_P {
                let rows = grads.par_iter().map(|&g| fig2_row(&base.with_gradient(g), z)).collect();
                collect_rows(rows, &mut t)?;
            }
            ctx.emit_csv("fig2_theory.csv", &t)
        }
        FigureId::Fig3Theory => {
            let grads = range(&a, -250.0, 250.0, 250)?;
            let mut t = Table::new(&[
                "gradient_nt_cm",
                "g_prime",
                "phase_label",
                "gamma_plus_s",
                "gamma_minus_s",
                "f_plus_hz",
                "f_minus_hz",
            ]);
            let rows = grads.par_iter().map(|&g| fig3_row(&base.with_gradient(g))).collect();
            collect_rows(rows, &mut t)?;
            ctx.emit_csv("fig3_theory.csv", &t)
        }
        FigureId::S2 => {
            let g = range(&a, 0.0, 6.0, 300)?;
            let sweep = sweep_spectrum(&g, 3)?;
            let mut t = Table::new(&["g_prime", "k", "re_q", "im_q"]);
            for (i, gp) in sweep.g_values.iter().enumerate() {
                for (k, q) in sweep.eigenvalues[i].iter().enumerate() {
                    t.push(vec![num(*gp), k.to_string(), num(q.re), num(q.im)]);
                }
            }
            ctx.emit_csv("s2.csv", &t)
        }
        FigureId::S3 => {
            let (g1, _) = ep_location::<f64>(1)?;
            let g: Vec<f64> = range(&a, 0.05, 5.0, 99)?.into_iter().filter(|g| (g - g1).abs() > 1e-3).collect();
            let rows: Vec<CliResult<Vec<String>>> = g
                .par_iter()
                .map(|&gp| {
                    let s = solve_spectrum(gp, 1)?;
                    let m0 = eigenmode(gp, s.q[0], torrey_lab::eigen::DEFAULT_GRID, 0)?;
                    let m1 = eigenmode(gp, s.q[1], torrey_lab::eigen::DEFAULT_GRID, 1)?;
                    let m = pt_symmetry_metrics(&m0, &m1)?;
                    Ok(vec![num(gp), num(m.eps1_m0), num(m.eps1_m1), num(m.eps12)])
                })
                .collect();
            let mut t = Table::new(&["g_prime", "eps1_m0", "eps1_m1", "eps12"]);
            collect_rows(rows, &mut t)?;
            ctx.emit_csv("s3.csv", &t)
        }
        FigureId::S5 => {
            let grads = range(&a, -250.0, 250.0, 50)?;
            let rows: Vec<CliResult<Vec<String>>> = grads
                .par_iter()
                .map(|&g| {
                    let p = truth_params(g)?;
                    Ok([g, p.a1, p.a2, p.tau1, p.tau2, hz(p.omega1), hz(p.omega2)].iter().map(|v| num(*v)).collect())
                })
                .collect();
            let mut t = Table::new(&["gradient_nt_cm", "a1", "a2", "tau1_s", "tau2_s", "f1_hz", "f2_hz"]);
            collect_rows(rows, &mut t)?;
            ctx.emit_csv("s5.csv", &t)
        }
    }
}
