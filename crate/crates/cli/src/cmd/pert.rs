use torrey_lab::perturbation::{t2_curve, wall_relaxation, MAX_LAMBDA};

use super::linspace;
use crate::failure::{CliResult, Failure};
use crate::output::{Ctx, Table};
use crate::PertCmd;

pub fn run(ctx: &Ctx, cmd: PertCmd) -> CliResult<()> {
    let PertCmd::T2 { lambda, d, l, gamma, gmin, gmax, steps } = cmd;
    let mut cfg = ctx.config.physical.selected();
    if let Some(v) = lambda {
        cfg.wall_lambda = v;
    }
    if let Some(v) = d {
        cfg.diffusion = v;
    }
    if let Some(v) = l {
        cfg.cell_length = v;
    }
    if let Some(v) = gamma {
        cfg.gamma_collision = v;
    }
    cfg.validate()?;
    if cfg.wall_lambda > MAX_LAMBDA {
        return Err(Failure::config(format!("lambda {} exceeds the small-λ limit {MAX_LAMBDA}", cfg.wall_lambda)));
    }
    let gamma2min = cfg.gamma_collision + wall_relaxation(cfg.wall_lambda, &cfg)?;
    let g = linspace(gmin, gmax, steps)?;
    let t2 = t2_curve(&cfg, gamma2min, &g)?;
    let mut t = Table::new(&["gradient_nt_cm", "t2_s"]);
    for (gi, ti) in g.iter().zip(&t2) {
        t.push_nums(&[*gi, *ti]);
    }
    ctx.emit_csv("t2.csv", &t)
}
