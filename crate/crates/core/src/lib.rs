//! Analytical model of cooperation availability (`p_co`) in multi-channel
//! MAC networks that use distributed information sharing (DISH).
//!
//! The crate is organised bottom-up:
//!
//! * [`quadrature`] — adaptive Simpson integration and monotone cubic
//!   interpolation used by the geometric constants.
//! * [`geometry`] — circle-intersection areas, the Poisson power identity and
//!   the three neighbour-count coefficients.
//! * [`analytic`] — non-interference probabilities, the coupled fixed point for
//!   control-channel statistics, `p_ctrl*` and the `p_co` chain.
//! * [`bandwidth`] — control/data bandwidth split and the `σ*` search.

pub mod analytic;
pub mod bandwidth;
pub mod error;
pub mod geometry;
pub mod quadrature;

pub use analytic::{
    p_co, p_ctrl_star, p_ni_cts, p_ni_oh, solve_fixed_point, stability_check,
    switch_noninterference, CoopReport, FixedPointState, HopMode, ModelParams, SolverOptions,
    StabilityVerdict,
};
pub use bandwidth::{
    derive_timings, optimize_sigma, sigma_star_table, AllocationScheme, BandwidthProblem,
    OptimizationResult, SigmaStarTable, SigmaSweep,
};
pub use error::ModelError;
pub use geometry::{lens_area, neighbor_constants, poisson_power_expectation, DiskPair, NeighborConstants};
