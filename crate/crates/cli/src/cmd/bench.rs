use serde::Serialize;
use serde_json::json;
use torrey_lab::bench::{
    phi0_sweep, run_monte_carlo, trim_disambiguate, two_cluster_case, BenchmarkStats, CaseOutcome, TrimOutcome,
    DEFAULT_TRIM_T0, PARAMS,
};

use crate::failure::CliResult;
use crate::output::{num, with_fields, Ctx, Table};
use crate::BenchCmd;

#[derive(Serialize)]
struct RunStats<'a> {
    seed: u64,
    stats: Vec<&'a BenchmarkStats<f64>>,
}

fn runs_table(results: &[(BenchmarkStats<f64>, Vec<torrey_lab::Result<CaseOutcome<f64>>>)]) -> Table {
    let mut header = vec!["gradient_nt_cm".to_string(), "run".into(), "status".into()];
    for p in PARAMS {
        header.push(format!("error_{p}"));
    }
    for p in PARAMS {
        header.push(format!("ci95_{p}"));
    }
    let refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new(&refs);
    for (stats, outcomes) in results {
        for (i, o) in outcomes.iter().enumerate() {
            let mut row = vec![num(stats.gradient), i.to_string()];
            match o {
                Ok(o) => {
                    row.push("ok".into());
                    row.extend(o.errors.iter().chain(&o.ci95).map(|v| num(*v)));
                }
                Err(e) => {
                    row.push(format!("failed: {e}"));
                    row.extend(std::iter::repeat_n(String::new(), 12));
                }
            }
            t.push(row);
        }
    }
    t
}

pub fn run(ctx: &Ctx, cmd: BenchCmd) -> CliResult<()> {
    let settings = ctx.config.bench.settings();
    match cmd {
        BenchCmd::Run { g_list, n, runs_csv } => {
            let results = run_monte_carlo(&g_list, n, ctx.seed, &settings)?;
            let out = RunStats { seed: ctx.seed, stats: results.iter().map(|(s, _)| s).collect() };
            ctx.emit_json("stats.json", &out)?;
            if runs_csv {
                ctx.emit_csv("runs.csv", &runs_table(&results))?;
            }
            Ok(())
        }
        BenchCmd::Phi0 { g, n } => {
            let sweep = phi0_sweep(g, n, ctx.seed, &settings)?;
            let clusters: Vec<_> = PARAMS.iter().map(|p| json!({"param": p, "n_clusters": sweep.n_clusters(p)})).collect();
            let v = with_fields(&sweep, vec![("seed", json!(ctx.seed)), ("cluster_counts", json!(clusters))])?;
            ctx.emit_json("phi0.json", &v)
        }
        BenchCmd::Trim { g, t0_list } => {
            let t0 = t0_list.unwrap_or_else(|| DEFAULT_TRIM_T0.to_vec());
            let case = two_cluster_case(g, &settings, ctx.seed)?;
            let outcome: TrimOutcome<f64> = trim_disambiguate(&case, &t0)?;
            let v = with_fields(
                &outcome,
                vec![
                    ("seed", json!(ctx.seed)),
                    ("gradient", json!(g)),
                    ("t0_list", json!(t0)),
                    ("physical", json!(outcome.physical())),
                    ("resolved_correctly", json!(outcome.resolved_correctly())),
                    ("case", serde_json::to_value(&case)?),
                ],
            )?;
            ctx.emit_json("trim.json", &v)
        }
    }
}
