//! Special functions, quadrature and piecewise-constant test functions.

pub mod quad;
pub mod special;
pub mod test_function;

pub use quad::{compensated_sum, quad_1d, quad_1d_pieces, quad_2d, quad_2d_pieces, Box2, CompensatedSum, QuadResult, QuadratureSpec};
pub use special::{
    beta_fn, erf, erfc, inc_beta_tails, inc_beta_tails_with_complement, inc_gamma_tails, ln_beta, log_gamma,
    normal_cdf, reg_inc_beta, reg_inc_gamma_lower, Tails,
};
pub use test_function::{tf_integrals, TestFunction, TfIntegrals};
