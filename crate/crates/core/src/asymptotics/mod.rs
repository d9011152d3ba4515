//! Limit constants, covariance functionals, lemma probes and regime
//! classification.

pub mod constants;
pub mod functionals;
pub mod lemmas;
pub mod limits;

pub use constants::{beta_kernel_marginal, gamma_moment_constant, hyperbolic_scale, jump_constant, GammaMoment, LogisticBeta};
pub use functionals::{limit_variance_ginibre, limit_variance_hyperbolic};
pub use lemmas::{binomial_exp_error, k_coeff_power_error, probe_binomial_exp, probe_k_coeff_power, BoundProbe, PowerProbe};
pub use limits::{
    growth_scale, intensity_mean, jump_variance, predicted_limit, statistic_vanishes, variance_envelope, LimitKind, LimitLaw,
    RegimeClass, ScalingFamily, ScalingRegime,
};
