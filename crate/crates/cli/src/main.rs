//! `torrey-lab`: command-line front end for the eigensolver, FID synthesis,
//! spectral fitting, comagnetometer estimators and the fit benchmark.

mod cmd;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Config;
use crate::failure::{CliResult, Failure};
use crate::output::Ctx;

pub const THREADS_ENV: &str = "TORREY_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "torrey-lab", version, about = "Diffusive spins in a field gradient: spectra, FIDs, fits, comagnetometry")]
struct Cli {
    /// TOML configuration; omitted keys take the ¹²⁹Xe cell defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory; a manifest is written next to the outputs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact spectrum of the dimensionless eigenproblem.
    #[command(subcommand)]
    Eig(EigCmd),
    /// Perturbative relaxation rates.
    #[command(subcommand)]
    Pert(PertCmd),
    /// FID synthesis.
    #[command(subcommand)]
    Fid(FidCmd),
    /// Periodograms and Lorentzian fits.
    #[command(subcommand)]
    Spectrum(SpectrumCmd),
    /// 2ω and 3ω comagnetometer estimators.
    #[command(subcommand)]
    Comag(ComagCmd),
    /// Monte-Carlo benchmark of the DLP fit.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Theory curves of a figure as CSV.
    Figure(FigureArgs),
    /// synth → fit → observables → comagnetometer estimate.
    Pipeline,
}

#[derive(Subcommand, Debug)]
pub enum EigCmd {
    /// CSV g_prime,k,re_q,im_q,phase_label.
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        gmin: f64,
        #[arg(long, default_value_t = 5.0)]
        gmax: f64,
        /// Number of intervals; steps + 1 points.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = torrey_lab::eigen::DEFAULT_K_MAX)]
        kmax: usize,
    },
    /// CSV zeta,re_m,im_m,abs_m of mode k at g′.
    Modes {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, default_value_t = torrey_lab::eigen::DEFAULT_GRID)]
        grid: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum PertCmd {
    /// CSV gradient_nt_cm,t2_s from 1/T₂ = Γ₂c + Γ_wall(λ) + γ²G²L⁴/(120D).
    T2 {
        /// Wall parameter λ (default from config).
        #[arg(long)]
        lambda: Option<f64>,
        /// D, cm²/s.
        #[arg(long)]
        d: Option<f64>,
        /// L, cm.
        #[arg(long)]
        l: Option<f64>,
        /// Γ₂c, s⁻¹.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = -200.0, allow_hyphen_values = true)]
        gmin: f64,
        #[arg(long, default_value_t = 200.0, allow_hyphen_values = true)]
        gmax: f64,
        #[arg(long, default_value_t = 40)]
        steps: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum FidCmd {
    /// CSV t_seconds,signal from the exact eigenmodes at the probe.
    Synth {
        /// Probe position, cm from the cell centre.
        #[arg(long, allow_hyphen_values = true)]
        zp: Option<f64>,
        /// Gradient, nT/cm.
        #[arg(long, allow_hyphen_values = true)]
        gradient: Option<f64>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ModelArg {
    Slp,
    Dlp,
    Tlp,
    Dlpm,
}

#[derive(Subcommand, Debug)]
pub enum SpectrumCmd {
    /// Fits |Y(ω)| and writes the report JSON.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "dlp")]
        model: ModelArg,
        /// Δφ starting value, rad.
        #[arg(long, allow_hyphen_values = true)]
        phi0: Option<f64>,
        /// Δω_Q starting value for TLP, rad/s.
        #[arg(long)]
        delta_q: Option<f64>,
        /// Cut the record at 12 T₂ for this T₂ estimate, s.
        #[arg(long)]
        t2: Option<f64>,
        /// Peak search band, Hz.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        band: Option<Vec<f64>>,
    },
    /// CSV omega_hz,power.
    Psd {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        fmin: Option<f64>,
        #[arg(long)]
        fmax: Option<f64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ComagCmd {
    /// CSV omega_rot_2w_hz from columns omega_129_hz, omega_131_hz.
    #[command(name = "2w")]
    TwoOmega {
        #[arg(long = "in")]
        input: PathBuf,
        /// Accepted for symmetry with 3w; the 2ω estimator needs only R.
        #[arg(long)]
        cal: Option<PathBuf>,
    },
    /// CSV d_b0_nt,d_pump_mw,d_omega_rot_hz relative to the first row.
    #[command(name = "3w")]
    ThreeOmega {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        cal: PathBuf,
    },
    /// Calibration JSON from a B₀ sweep and a pump sweep, or the structured
    /// matrix from the configured γ and χ.
    Calibrate {
        #[arg(long, required_unless_present = "structured")]
        b0: Option<PathBuf>,
        #[arg(long, required_unless_present = "structured")]
        pump: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["b0", "pump"])]
        structured: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum BenchCmd {
    /// JSON statistics per gradient.
    Run {
        /// Gradients, nT/cm, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        g_list: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Also write one CSV row per run.
        #[arg(long)]
        runs_csv: bool,
    },
    /// Error spread over random Δφ starting values on one noisy record.
    Phi0 {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 24)]
        n: usize,
    },
    /// Trimming disambiguation on the two-cluster case.
    Trim {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        /// Start trims, s.
        #[arg(long, value_delimiter = ',')]
        t0_list: Option<Vec<f64>>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
#[value(rename_all = "snake_case")]
pub enum FigureId {
    Fig2Theory,
    Fig3Theory,
    S2,
    S3,
    S5,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_enum)]
    pub id: FigureId,
    /// Axis range (nT/cm for fig2/fig3/s5, g′ for s2/s3).
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::config(format!("{THREADS_ENV}='{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("thread pool: {e}")))
}

fn run(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    init_threads()?;
    let config = Config::load(cli.config.as_deref())?;
    let seed = cli.seed.unwrap_or(config.seed);
    let ctx = Ctx::new(config, seed, cli.out, argv);
    let res = match cli.command {
        Command::Eig(c) => cmd::eig::run(&ctx, c),
        Command::Pert(c) => cmd::pert::run(&ctx, c),
        Command::Fid(c) => cmd::fid::run(&ctx, c),
        Command::Spectrum(c) => cmd::spectrum::run(&ctx, c),
        Command::Comag(c) => cmd::comag::run(&ctx, c),
        Command::Bench(c) => cmd::bench::run(&ctx, c),
        Command::Figure(a) => cmd::figure::run(&ctx, a),
        Command::Pipeline => cmd::pipeline::run(&ctx),
    };
    ctx.finish(res.as_ref().err().map_or(0, |f| f.code))?;
    res
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { failure::EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("torrey-lab: {f}");
            ExitCode::from(f.code)
        }
    }
}
