//! Scale constants and the logistic-beta kernel.

use crate::error::{Error, Result};
use crate::funcs::quad::{quad_1d, quad_1d_pieces, QuadratureSpec};
use crate::funcs::special::{inc_beta_tails_with_complement, ln_beta, log_gamma, logistic_pair, Tails};

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain("alpha", format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

/// `α e^R / 8`, the normalisation of the fixed-scale hyperbolic statistic.
pub fn hyperbolic_scale(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha * r.exp() / 8.0)
}

/// `ln` of `e^{(α+1)(x+y)} / (e^x + e^y)^{2α+1}`.
pub(crate) fn ln_pair_kernel(alpha: f64, x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    let log_sum = hi + (lo - hi).exp().ln_1p();
    (alpha + 1.0) * (x + y) - (2.0 * alpha + 1.0) * log_sum
}

/// The pair kernel normalised by `B(α, α+1)`, as a function of the gap
/// `t = y - x`: the density of the logit of a `Beta(α+1, α)` variable.
#[derive(Debug, Clone, Copy)]
pub struct LogisticBeta {
    alpha: f64,
    ln_norm: f64,
}

impl LogisticBeta {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(LogisticBeta { alpha, ln_norm: ln_beta(alpha, alpha + 1.0)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `ln B(α, α+1)`.
    pub fn ln_norm(&self) -> f64 {
        self.ln_norm
    }

    /// Normalised kernel `k(x, y) / B(α, α+1)`.
    pub fn kernel(&self, x: f64, y: f64) -> f64 {
        (ln_pair_kernel(self.alpha, x, y) - self.ln_norm).exp()
    }

    /// Both tails of the gap distribution at `t`.
    pub fn tails(&self, t: f64) -> Tails {
        if t == f64::INFINITY {
            return Tails::ONE;
        }
        if t == f64::NEG_INFINITY {
            return Tails::ZERO;
        }
        let (s, c) = logistic_pair(t);
        if s <= 0.0 {
            return Tails::ZERO;
        }
        if c <= 0.0 {
            return Tails::ONE;
        }
        inc_beta_tails_with_complement(self.alpha + 1.0, self.alpha, s, c).expect("valid logistic beta arguments")
    }

    /// Probability that the gap lies in `[lo, hi]`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        Tails::mass_between(self.tails(lo), self.tails(hi))
    }
}

/// `(1/B(α, α+1)) ∫ e^{(α+1)(x+y)} / (e^x + e^y)^{2α+1} dy` by quadrature;
/// equals `e^x`.
pub fn beta_kernel_marginal(alpha: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let k = LogisticBeta::new(alpha)?;
    let r = quad_1d_pieces(|y| k.kernel(x, y), &[f64::NEG_INFINITY, x, f64::INFINITY], spec)?;
    Ok(r.value)
}

/// `(4^α / Γ(α)) ∫_0^∞ t^α e^{-4t} dt` by quadrature, alongside its closed form `α/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMoment {
    pub numeric: f64,
    pub closed_form: f64,
}

pub fn gamma_moment_constant(alpha: f64, spec: &QuadratureSpec) -> Result<GammaMoment> {
    check_alpha(alpha)?;
    let ln_front = alpha * 4f64.ln() - log_gamma(alpha)?;
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        (ln_front + alpha * t.ln() - 4.0 * t).exp()
    };
    let r = quad_1d_pieces(integrand, &[0.0, 1.0, f64::INFINITY], spec)?;
    Ok(GammaMoment { numeric: r.value, closed_form: alpha / 4.0 })
}

/// `(1/B(α, α+1)) ∫_{x<0} ∫_{y>0} e^{(α+1)(x+y)}/(e^x+e^y)^{2α+1} dy dx`,
/// the weight of a single jump in the vanishing-scale variance.
pub fn jump_constant(alpha: f64, spec: &QuadratureSpec) -> Result<f64> {
    let k = LogisticBeta::new(alpha)?;
    let r = quad_1d(|x: f64| x.exp() * k.tails(-x).upper, f64::NEG_INFINITY, 0.0, spec)?;
    Ok(r.value)
}
