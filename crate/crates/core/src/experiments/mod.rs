//! Monte Carlo experiments and the statistical tests they report.

pub mod gof;
pub mod plan;
pub mod runners;

pub use gof::GofReport;
pub use plan::{ExperimentPlan, DEFAULT_EPS_TRUNC, DEFAULT_LEVEL, DEFAULT_SEED};
pub use runners::{
    degenerate_check, run_clt, run_poisson, run_superexp, run_whitenoise, write_replicate_csv, zero_statistic_check,
    CltReport, DegenerateReport, JumpReport, PoissonReport, ReplicateRow, WhiteNoiseReport, ZeroReport,
};
