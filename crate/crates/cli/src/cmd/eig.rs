use torrey_lab::eigen::{eigenmode, solve_spectrum, sweep_spectrum};

use super::linspace;
use crate::failure::{CliResult, Failure};
use crate::output::{num, Ctx, Table};
use crate::EigCmd;

pub fn run(ctx: &Ctx, cmd: EigCmd) -> CliResult<()> {
    match cmd {
        EigCmd::Sweep { gmin, gmax, steps, kmax } => {
            let g = linspace(gmin, gmax, steps)?;
            let sweep = sweep_spectrum(&g, kmax)?;
            let mut t = Table::new(&["g_prime", "k", "re_q", "im_q", "phase_label"]);
            for (i, gp) in sweep.g_values.iter().enumerate() {
                for (k, q) in sweep.eigenvalues[i].iter().enumerate() {
                    t.push(vec![num(*gp), k.to_string(), num(q.re), num(q.im), sweep.phase_label[i].label().into()]);
                }
            }
            ctx.emit_csv("eig_sweep.csv", &t)
        }
        EigCmd::Modes { g, k, grid } => {
            if grid < 3 {
                return Err(Failure::config("--grid needs at least 3 points"));
            }
            let s = solve_spectrum(g, k.max(1))?;
            let m = eigenmode(g, s.q[k], grid, k)?;
            let mut t = Table::new(&["zeta", "re_m", "im_m", "abs_m"]);
            for (z, v) in m.grid.iter().zip(&m.values) {
                t.push_nums(&[*z, v.re, v.im, v.norm()]);
            }
            ctx.emit_csv("eig_modes.csv", &t)
        }
    }
}
