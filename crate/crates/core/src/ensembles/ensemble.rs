use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::special::{
    inc_beta_tails_with_complement, inc_gamma_tails, ln_gamma_prefix, ln_gamma_ratio, log_gamma, Tails,
};

/// The two rotation-invariant determinantal ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble", into = "RawEnsemble")]
pub enum Ensemble {
    /// Infinite Ginibre ensemble on the plane.
    Ginibre,
    /// Hyperbolic ensemble on the unit disc with parameter `alpha > 0`.
    Hyperbolic { alpha: f64 },
}

#[derive(Serialize, Deserialize)]
struct RawEnsemble {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

impl TryFrom<RawEnsemble> for Ensemble {
    type Error = Error;

    fn try_from(raw: RawEnsemble) -> Result<Self> {
        match (raw.kind.as_str(), raw.alpha) {
            ("ginibre", None) => Ok(Ensemble::Ginibre),
            ("ginibre", Some(_)) => Err(Error::invalid("alpha is only meaningful for the hyperbolic ensemble")),
            ("hyperbolic", Some(alpha)) => Ensemble::hyperbolic(alpha),
            ("hyperbolic", None) => Err(Error::invalid("hyperbolic ensemble requires alpha")),
            (other, _) => Err(Error::invalid(format!("unknown ensemble kind {other:?}"))),
        }
    }
}

impl From<Ensemble> for RawEnsemble {
    fn from(e: Ensemble) -> Self {
        match e {
            Ensemble::Ginibre => RawEnsemble { kind: "ginibre".into(), alpha: None },
            Ensemble::Hyperbolic { alpha } => RawEnsemble { kind: "hyperbolic".into(), alpha: Some(alpha) },
        }
    }
}

impl Ensemble {
    pub fn hyperbolic(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive and finite, got {alpha}")));
        }
        Ok(Ensemble::Hyperbolic { alpha })
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Ensemble::Ginibre => None,
            Ensemble::Hyperbolic { alpha } => Some(*alpha),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::Ginibre => "ginibre",
            Ensemble::Hyperbolic { .. } => "hyperbolic",
        }
    }

    /// Expected number of points with squared modulus in `[lo.u, hi.u]`.
    pub fn expected_count(&self, lo: SquaredRadius, hi: SquaredRadius) -> f64 {
        match self {
            Ensemble::Ginibre => hi.u - lo.u,
            Ensemble::Hyperbolic { alpha } => {
                let odds = |p: SquaredRadius| if p.comp <= 0.0 { f64::INFINITY } else { p.u / p.comp };
                alpha * (odds(hi) - odds(lo))
            }
        }
    }
}

/// A squared modulus `u = r²` together with `1 - u`, each carried at full
/// relative precision (the complement matters for hyperbolic points near the
/// unit circle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquaredRadius {
    pub u: f64,
    pub comp: f64,
}

impl SquaredRadius {
    pub const ZERO: SquaredRadius = SquaredRadius { u: 0.0, comp: 1.0 };

    pub fn from_modulus(r: f64) -> Self {
        SquaredRadius { u: r * r, comp: (1.0 - r) * (1.0 + r) }
    }

    /// Point at hyperbolic modulus `s`: `r = tanh(s/2)` and `1 - r² = sech²(s/2)`.
    pub fn from_hyperbolic(s: f64) -> Self {
        if s <= 0.0 {
            return SquaredRadius::ZERO;
        }
        let h = 0.5 * s;
        let t = h.tanh();
        let sech = 1.0 / h.cosh();
        SquaredRadius { u: t * t, comp: sech * sech }
    }

    pub fn modulus(&self) -> f64 {
        self.u.sqrt()
    }

    /// Hyperbolic modulus `ln((1+r)/(1-r))`, using the stored complement.
    pub fn hyperbolic(&self) -> f64 {
        if self.comp <= 0.0 {
            return f64::INFINITY;
        }
        let r = self.u.sqrt();
        if r < 0.5 {
            return r.ln_1p() - (-r).ln_1p();
        }
        // 1 - r = comp / (1 + r)
        2.0 * r.ln_1p() - self.comp.ln()
    }
}

/// `ln((1+r)/(1-r))`, the hyperbolic distance from the origin.
pub fn hyperbolic_modulus(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain("hyperbolic_modulus", format!("need 0 <= r < 1, got {r}")));
    }
    Ok(r.ln_1p() - (-r).ln_1p())
}

/// Inverse of [`hyperbolic_modulus`]: `s ↦ (e^s - 1)/(e^s + 1)`.
pub fn hyperbolic_modulus_inverse(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain("hyperbolic_modulus_inverse", format!("need s >= 0, got {s}")));
    }
    Ok((0.5 * s).tanh())
}

/// `Γ(α+n+1) / (Γ(α) Γ(n+1))`, the weight of `z^n` in the hyperbolic kernel.
pub fn k_coeff(alpha: f64, n: u64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain("k_coeff", format!("alpha must be positive, got {alpha}")));
    }
    Ok(ln_k_coeff(alpha, n as f64).exp())
}

pub(crate) fn ln_k_coeff(alpha: f64, n: f64) -> f64 {
    // ln Γ(n+1+α) - ln Γ(n+1) - ln Γ(α)
    ln_gamma_ratio(n + 1.0, alpha) - log_gamma(alpha).expect("alpha validated")
}

/// Both tails of the law of `ρ_n²` at `point`.
pub fn radial_tails(e: &Ensemble, n: u64, point: SquaredRadius) -> Result<Tails> {
    let a = n as f64 + 1.0;
    match e {
        Ensemble::Ginibre => inc_gamma_tails(a, point.u),
        Ensemble::Hyperbolic { alpha } => {
            if point.comp <= 0.0 {
                return Ok(Tails::ONE);
            }
            inc_beta_tails_with_complement(a, *alpha, point.u, point.comp)
        }
    }
}

/// `P(ρ_n ≤ r)`.
pub fn radial_cdf(e: &Ensemble, n: u64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain("radial_cdf", format!("radius must be nonnegative, got {r}")));
    }
    if let Ensemble::Hyperbolic { .. } = e {
        if r > 1.0 {
            return Err(Error::domain("radial_cdf", format!("hyperbolic radius must be at most 1, got {r}")));
        }
    }
    radial_tails(e, n, SquaredRadius::from_modulus(r)).map(|t| t.lower)
}

/// Precomputed pieces of `ln(F_n(u) - F_{n+1}(u))`, the decrement of the
/// radial CDFs in `n`: the Poisson weight `u^{n+1} e^{-u}/(n+1)!` (Ginibre)
/// or `u^{n+1}(1-u)^α / ((n+1) B(n+1, α))` (hyperbolic).
#[derive(Debug, Clone, Copy)]
pub(crate) enum CdfStep {
    Ginibre { u: f64 },
    Hyperbolic { alpha: f64, ln_u: f64, offset: f64 },
}

impl CdfStep {
    pub(crate) fn new(e: &Ensemble, point: SquaredRadius) -> Self {
        match e {
            Ensemble::Ginibre => CdfStep::Ginibre { u: point.u },
            Ensemble::Hyperbolic { alpha } => {
                let ln_u = if point.u > 0.5 { (-point.comp).ln_1p() } else { point.u.ln() };
                let offset = alpha * point.comp.ln() - log_gamma(*alpha).expect("alpha validated");
                CdfStep::Hyperbolic { alpha: *alpha, ln_u, offset }
            }
        }
    }

    pub(crate) fn ln_step(&self, n: f64) -> f64 {
        let a = n + 1.0;
        match *self {
            CdfStep::Ginibre { u } => ln_gamma_prefix(a, u),
            CdfStep::Hyperbolic { alpha, ln_u, offset } => a * ln_u + offset + ln_gamma_ratio(a, alpha) - a.ln(),
        }
    }
}

/// Correlation kernel of the ensemble with respect to Lebesgue measure.
pub fn kernel_eval(e: &Ensemble, z: Complex64, w: Complex64) -> Result<Complex64> {
    match e {
        Ensemble::Ginibre => {
            let exponent = z * w.conj() - 0.5 * z.norm_sqr() - 0.5 * w.norm_sqr();
            Ok(exponent.exp() / std::f64::consts::PI)
        }
        Ensemble::Hyperbolic { alpha } => {
            if z.norm() >= 1.0 || w.norm() >= 1.0 {
                return Err(Error::domain("kernel_eval", "hyperbolic kernel needs |z|, |w| < 1"));
            }
            let half = 0.5 * (alpha - 1.0);
            let weight = (1.0 - z.norm_sqr()).powf(half) * (1.0 - w.norm_sqr()).powf(half);
            let denom = (Complex64::new(1.0, 0.0) - z * w.conj()).powf(alpha + 1.0);
            Ok(Complex64::new(alpha * weight / std::f64::consts::PI, 0.0) / denom)
        }
    }
}
