//! Parameter sweeps that pair the analytic availability model with the
//! simulator, produce figure-equivalent CSV datasets and check them against
//! deviation and linearity bounds.

pub mod dataset;
pub mod error;
pub mod figures;
pub mod stats;
pub mod sweep;

pub use dataset::{Bound, Check, Column, FigureDataset};
pub use error::{ExperimentError, Result};
pub use figures::{reproduce, sweep_dataset, DeviationBounds, FigureId, ReproduceOptions, Scale, LINEARITY_R2};
pub use stats::{
    control_send_gaps, ks_exponential, linearity_report, max_relative_deviation, mean_sd, paired_linearity,
    poissonness_check, KsReport, LinearFit,
};
pub use sweep::{analytic_column, analytic_point, run_sweep, Param, Sweep, SweepRuns};
