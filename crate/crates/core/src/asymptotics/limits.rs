//! Scaling regimes and the limit laws they predict for linear statistics
//! `Σ f(a_R (coord(z) - R))`.

use serde::{Deserialize, Serialize};

use super::constants::{hyperbolic_scale, jump_constant};
use super::functionals::{limit_variance_ginibre, limit_variance_hyperbolic};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::funcs::quad::{CompensatedSum, QuadratureSpec};
use crate::funcs::test_function::TestFunction;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Declared dependence of the scale `a_R` on `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScalingFamily {
    /// `a_R = 1`.
    Fixed,
    /// `a_R = coef · R^p`.
    Power { coef: f64, p: f64 },
    /// `a_R = coef · e^{cR}`.
    Exponential { coef: f64, c: f64 },
    /// `a_R = R` (Ginibre) or `a_R = e^R` (hyperbolic).
    Extreme,
}

impl ScalingFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ScalingFamily::Power { coef, p } => coef > 0.0 && coef.is_finite() && p.is_finite(),
            ScalingFamily::Exponential { coef, c } => coef > 0.0 && coef.is_finite() && c.is_finite(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid scaling family {self:?}: coefficient must be positive and exponents finite")))
        }
    }

    /// `a_R` at the given `R`.
    pub fn scale_at(&self, e: &Ensemble, r: f64) -> f64 {
        match *self {
            ScalingFamily::Fixed => 1.0,
            ScalingFamily::Power { coef, p } => coef * r.powf(p),
            ScalingFamily::Exponential { coef, c } => coef * (c * r).exp(),
            ScalingFamily::Extreme => match e {
                Ensemble::Ginibre => r,
                Ensemble::Hyperbolic { .. } => r.exp(),
            },
        }
    }
}

/// Asymptotic behaviour of `a_R` relative to the ensemble's critical scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RegimeClass {
    /// `a_R` constant: Gaussian limit with a nonlocal variance.
    FixedScale { coef: f64 },
    /// `1 ≪ a_R ≪ e^R` (hyperbolic) or `1 ≪ a_R ≪ R` (Ginibre).
    WhiteNoise,
    /// `a_R` proportional to the critical scale: Poisson limit.
    Extreme { intensity: f64 },
    /// `a_R ≪ 1`: the fluctuations concentrate at the jumps of `f`.
    Vanishing,
    /// `a_R ≫ e^R` (hyperbolic) or `a_R ≫ R` (Ginibre): variance tends to zero.
    Degenerate,
}

/// A declared scaling family together with its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRegime {
    pub family: ScalingFamily,
    pub class: RegimeClass,
}

impl ScalingRegime {
    pub fn classify(e: &Ensemble, family: ScalingFamily) -> Result<Self> {
        family.validate()?;
        let class = match (e, family) {
            (_, ScalingFamily::Fixed) => RegimeClass::FixedScale { coef: 1.0 },
            (Ensemble::Ginibre, ScalingFamily::Extreme) => RegimeClass::Extreme { intensity: 2.0 },
            (Ensemble::Hyperbolic { alpha }, ScalingFamily::Extreme) => RegimeClass::Extreme { intensity: alpha / 4.0 },
            (_, ScalingFamily::Power { coef, p }) | (_, ScalingFamily::Exponential { coef, c: p }) if p == 0.0 => {
                RegimeClass::FixedScale { coef }
            }
            (_, ScalingFamily::Power { p, .. }) | (_, ScalingFamily::Exponential { c: p, .. }) if p < 0.0 => RegimeClass::Vanishing,
            (Ensemble::Ginibre, ScalingFamily::Power { coef, p }) => {
                if p < 1.0 {
                    RegimeClass::WhiteNoise
                } else if p == 1.0 {
                    RegimeClass::Extreme { intensity: 2.0 / coef }
                } else {
                    RegimeClass::Degenerate
                }
            }
            (Ensemble::Ginibre, ScalingFamily::Exponential { .. }) => RegimeClass::Degenerate,
            (Ensemble::Hyperbolic { .. }, ScalingFamily::Power { .. }) => RegimeClass::WhiteNoise,
            (Ensemble::Hyperbolic { alpha }, ScalingFamily::Exponential { coef, c }) => {
                if c < 1.0 {
                    RegimeClass::WhiteNoise
                } else if c == 1.0 {
                    RegimeClass::Extreme { intensity: alpha / (4.0 * coef) }
                } else {
                    RegimeClass::Degenerate
                }
            }
        };
        Ok(ScalingRegime { family, class })
    }
}

/// Predicted limit of the linear statistic `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind {
    /// `(S - centering) / √scale → N(0, variance)`.
    Gaussian { centering: f64, scale: f64, variance: f64 },
    /// `(S - centering) / √scale → N(0, variance)` with `variance = 2∫f²` and
    /// no covariance between disjointly supported functions.
    WhiteNoise { centering: f64, scale: f64, variance: f64 },
    /// The rescaled points converge to a homogeneous Poisson process.
    Poisson { intensity: f64 },
    /// `Var S → 0`; `variance_envelope` is the leading bound `Σ E f²` at this `R`.
    Degenerate { variance_envelope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    #[serde(flatten)]
    pub kind: LimitKind,
    pub provenance: String,
}

/// Exact `E S` from the one-point intensity: `∫ f(a_R(r - R)) 2r dr` (Ginibre)
/// or `∫ f(a_R(s - R)) (α/2) sinh s ds` (hyperbolic).
pub fn intensity_mean(e: &Ensemble, f: &TestFunction, r: f64, a_r: f64) -> f64 {
    let mut total = CompensatedSum::new();
    for (lo, hi, v) in f.nonzero_pieces() {
        let s_lo = (r + lo / a_r).max(0.0);
        let s_hi = (r + hi / a_r).max(0.0);
        if s_hi <= s_lo {
            continue;
        }
        let mass = match e {
            Ensemble::Ginibre => (s_hi - s_lo) * (s_hi + s_lo),
            Ensemble::Hyperbolic { alpha } => {
                // cosh b - cosh a = 2 sinh((b+a)/2) sinh((b-a)/2)
                alpha * ((s_hi + s_lo) / 2.0).sinh() * ((s_hi - s_lo) / 2.0).sinh()
            }
        };
        total.add(v * mass);
    }
    total.value()
}

/// Critical scale `C_R` (hyperbolic) or `R` (Ginibre) multiplying the
/// fixed-scale variance.
pub fn growth_scale(e: &Ensemble, r: f64) -> Result<f64> {
    match e {
        Ensemble::Ginibre => Ok(r),
        Ensemble::Hyperbolic { alpha } => hyperbolic_scale(*alpha, r),
    }
}

/// Leading-order `Σ_n E f²(X_n)`: `(2 C_R / a_R) ∫ f²` or `(2R / a_R) ∫ f²`.
pub fn variance_envelope(e: &Ensemble, f: &TestFunction, r: f64, a_r: f64) -> Result<f64> {
    Ok(2.0 * growth_scale(e, r)? / a_r * f.integrals().square)
}

/// True when every point has coordinate above the support of `f`, so that
/// `S = 0` almost surely.
pub fn statistic_vanishes(f: &TestFunction, r: f64, a_r: f64) -> bool {
    match f.essential_right_endpoint() {
        None => true,
        Some(m) => m <= -r * a_r,
    }
}

/// Leading-order variance when `a_R ≪ 1`: every jump `h` at `x` contributes
/// `(α/4) D_α h² e^{R + x/a_R}` (hyperbolic, `D_α` the jump constant) or
/// `h² (R + x/a_R)/√π` (Ginibre).
pub fn jump_variance(e: &Ensemble, f: &TestFunction, r: f64, a_r: f64, spec: &QuadratureSpec) -> Result<f64> {
    let weight = match e {
        Ensemble::Ginibre => None,
        Ensemble::Hyperbolic { alpha } => Some(alpha / 4.0 * jump_constant(*alpha, spec)?),
    };
    let mut total = CompensatedSum::new();
    for (x, h) in f.jumps() {
        let local = r + x / a_r;
        if local <= 0.0 {
            continue;
        }
        total.add(match weight {
            None => h * h * local / SQRT_PI,
            Some(w) => w * h * h * local.exp(),
        });
    }
    Ok(total.value())
}

/// Limit law predicted for `Σ f(a_R(coord(z) - R))` at radius `r`.
pub fn predicted_limit(e: &Ensemble, regime: &ScalingRegime, f: &TestFunction, r: f64, spec: &QuadratureSpec) -> Result<LimitLaw> {
    let a_r = regime.family.scale_at(e, r);
    if !(a_r > 0.0) || !a_r.is_finite() {
        return Err(Error::invalid(format!("scale a_R = {a_r} at R = {r} is not positive and finite")));
    }
    let law = |kind: LimitKind, provenance: &str| Ok(LimitLaw { kind, provenance: provenance.to_string() });
    match regime.class {
        RegimeClass::FixedScale { coef } => {
            let g = f.dilate(coef);
            let ints = g.integrals();
            let scale = growth_scale(e, r)?;
            match e {
                Ensemble::Ginibre => law(
                    LimitKind::Gaussian { centering: 2.0 * r * ints.integral, scale, variance: limit_variance_ginibre(&g) },
                    "fixed-scale CLT, Ginibre",
                ),
                Ensemble::Hyperbolic { alpha } => law(
                    LimitKind::Gaussian {
                        centering: 2.0 * scale * ints.exp_weighted,
                        scale,
                        variance: limit_variance_hyperbolic(*alpha, &g, spec)?,
                    },
                    "fixed-scale CLT, hyperbolic",
                ),
            }
        }
        RegimeClass::WhiteNoise => law(
            LimitKind::WhiteNoise {
                centering: intensity_mean(e, f, r, a_r),
                scale: growth_scale(e, r)? / a_r,
                variance: 2.0 * f.integrals().square,
            },
            "white-noise CLT",
        ),
        RegimeClass::Extreme { intensity } => law(LimitKind::Poisson { intensity }, "Poisson limit"),
        RegimeClass::Degenerate => {
            law(LimitKind::Degenerate { variance_envelope: variance_envelope(e, f, r, a_r)? }, "vanishing variance")
        }
        RegimeClass::Vanishing => {
            if statistic_vanishes(f, r, a_r) {
                return law(LimitKind::Degenerate { variance_envelope: 0.0 }, "statistic vanishes identically");
            }
            law(
                LimitKind::Gaussian { centering: intensity_mean(e, f, r, a_r), scale: jump_variance(e, f, r, a_r, spec)?, variance: 1.0 },
                "jump CLT",
            )
        }
    }
}
