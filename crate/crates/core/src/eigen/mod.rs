//! Exact spectrum of the dimensionless eigenproblem M″ = (ig′ζ − q)M on
//! ζ ∈ [−1, 1] with Neumann ends, and its two-mode reduction.

mod ep;
mod modes;
mod shooting;
mod spectrum;
mod two_mode;

pub use ep::{ep_location, frequency_splitting, locate_ep_numeric, LocatedEp, Splitting, MAX_EP_INDEX};
pub use modes::{eigenmode, pt_symmetry_metrics, EigenMode, PtMetrics, DEFAULT_GRID};
pub use shooting::{boundary_mismatch, Shooter, Shot};
pub use spectrum::{
    solve_spectrum, solve_spectrum_with, sort_spectrum, sweep_spectrum, ContinuationOptions, Phase, Spectrum,
    SpectrumSweep,
};
pub use two_mode::{coupling_from_g_prime, two_mode, two_mode_ep, TwoModeSystem};

pub const DEFAULT_K_MAX: usize = 3;
