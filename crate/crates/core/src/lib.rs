//! Exact simulation and moment oracles for the moduli of the Ginibre and
//! hyperbolic determinantal point processes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod funcs;
pub mod oracle;

pub use asymptotics::{LimitKind, LimitLaw, ScalingFamily, ScalingRegime};
pub use ensembles::{Coordinate, Ensemble, RadialSample, Strategy, Window, WindowSampler};
pub use error::{Error, Result};
pub use experiments::{ExperimentPlan, GofReport};
pub use funcs::{QuadratureSpec, TestFunction};
pub use oracle::MomentReport;
