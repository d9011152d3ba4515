//! Experiment plans.

use serde::{Deserialize, Serialize};

use crate::asymptotics::ScalingFamily;
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::funcs::test_function::TestFunction;

pub const DEFAULT_SEED: u64 = 0xD99;
pub const DEFAULT_EPS_TRUNC: f64 = 1e-12;
pub const DEFAULT_LEVEL: f64 = 0.01;
/// Fewest replicates accepted for a goodness-of-fit test.
pub const MIN_GOF_REPLICATES: u64 = 100;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_eps() -> f64 {
    DEFAULT_EPS_TRUNC
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

/// One Monte Carlo experiment: a statistic, a scaling family and a ladder of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub ensemble: Ensemble,
    pub f: TestFunction,
    /// Second statistic for cross-correlation checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<TestFunction>,
    pub scaling: ScalingFamily,
    #[serde(rename = "R_ladder")]
    pub r_ladder: Vec<f64>,
    pub replicates: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps_trunc: f64,
    /// Horizon of the counting window for Poisson experiments.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_level")]
    pub level: f64,
    /// Report statistics without attaching a verdict.
    #[serde(default)]
    pub exploratory: bool,
}

impl ExperimentPlan {
    pub fn new(ensemble: Ensemble, f: TestFunction, scaling: ScalingFamily, r_ladder: Vec<f64>, replicates: u64) -> Self {
        ExperimentPlan {
            ensemble,
            f,
            g: None,
            scaling,
            r_ladder,
            replicates,
            seed: DEFAULT_SEED,
            eps_trunc: DEFAULT_EPS_TRUNC,
            horizon: None,
            level: DEFAULT_LEVEL,
            exploratory: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_g(mut self, g: TestFunction) -> Self {
        self.g = Some(g);
        self
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scaling.validate()?;
        if self.r_ladder.is_empty() {
            return Err(Error::invalid("R_ladder must not be empty"));
        }
        if self.r_ladder.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid("R_ladder entries must be finite and nonnegative"));
        }
        if self.r_ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("R_ladder must be strictly increasing"));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be positive"));
        }
        if !(self.eps_trunc > 0.0 && self.eps_trunc < 1.0) {
            return Err(Error::invalid(format!("eps_trunc must lie in (0, 1), got {}", self.eps_trunc)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid(format!("level must lie in (0, 1), got {}", self.level)));
        }
        Ok(())
    }

    pub(crate) fn require_gof_power(&self) -> Result<()> {
        if self.replicates < MIN_GOF_REPLICATES {
            return Err(Error::Rejected(format!(
                "{} replicates is too few for a goodness-of-fit test (need at least {MIN_GOF_REPLICATES})",
                self.replicates
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let s = r#"{"ensemble":{"kind":"ginibre"},"f":{"breakpoints":[0,1],"values":[1]},
                    "scaling":{"family":"power","coef":1.0,"p":0.5},"R_ladder":[400],"replicates":100}"#;
        let p: ExperimentPlan = serde_json::from_str(s).unwrap();
        assert_eq!(p.seed, DEFAULT_SEED);
        assert_eq!(p.eps_trunc, 1e-12);
        p.validate().unwrap();
        let back: ExperimentPlan = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn rejects_bad_plans() {
        let f = TestFunction::indicator(0.0, 1.0).unwrap();
        let base = ExperimentPlan::new(Ensemble::Ginibre, f, ScalingFamily::Fixed, vec![10.0], 100);
        assert!(base.validate().is_ok());
        let mut p = base.clone();
        p.r_ladder.clear();
        assert!(p.validate().is_err());
        let mut p = base.clone();
        p.r_ladder = vec![10.0, 5.0];
        assert!(p.validate().is_err());
        let mut p = base;
        p.replicates = 50;
        assert!(p.require_gof_power().is_err());
    }
}
