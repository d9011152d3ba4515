//! Error terms of the two approximation lemmas, with grid probes that exhibit
//! finite constants for their bounds.

use serde::{Deserialize, Serialize};

use crate::ensembles::k_coeff;
use crate::error::{Error, Result};
use crate::funcs::special::log_gamma;

/// `|(1 - 2/(y+1))^{2⌊ty⌋} - e^{-4t}|`.
pub fn binomial_exp_error(y: f64, t: f64) -> Result<f64> {
    if !(y > 1.0) || !(t >= 0.0) || !y.is_finite() || !t.is_finite() {
        return Err(Error::domain("binomial_exp_error", format!("need y > 1 and t >= 0, got y={y}, t={t}")));
    }
    let k = (t * y).floor();
    let lhs = (2.0 * k * (-2.0 / (y + 1.0)).ln_1p()).exp();
    Ok((lhs - (-4.0 * t).exp()).abs())
}

/// `|k_⌊y⌋ - y^α / Γ(α)|`.
pub fn k_coeff_power_error(alpha: f64, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain("k_coeff_power_error", format!("need finite y >= 0, got {y}")));
    }
    let k = k_coeff(alpha, y.floor() as u64)?;
    let power = if y == 0.0 { 0.0 } else { (alpha * y.ln() - log_gamma(alpha)?).exp() };
    Ok((k - power).abs())
}

/// Result of a grid probe for a bound of the form `error ≤ C · weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundProbe {
    /// Smallest constant consistent with the grid.
    pub constant: f64,
    /// Supremum of `error / weight` over the grid.
    pub sup: f64,
    /// Supremum restricted to each decade of `y`, in increasing order.
    pub decade_suprema: Vec<f64>,
    /// No decade supremum exceeds 1.5 times the previous one.
    pub bounded: bool,
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let steps = (decades * per_decade as f64).round() as usize;
    (0..=steps).map(|i| lo * 10f64.powf(decades * i as f64 / steps as f64)).collect()
}

fn summarize(per_decade: Vec<f64>, floor: f64) -> BoundProbe {
    let sup = per_decade.iter().copied().fold(0.0, f64::max);
    let bounded = sup.is_finite() && per_decade.windows(2).all(|w| w[1] <= 1.5 * w[0].max(f64::MIN_POSITIVE));
    BoundProbe { constant: sup.max(floor), sup, decade_suprema: per_decade, bounded }
}

/// Supremum of `binomial_exp_error(y, t) · y · e^{t/c0}` over `y ∈ [10², 10⁶]`
/// (log-spaced) and `t ∈ [0, 20]`.
pub fn probe_binomial_exp(c0: f64) -> Result<BoundProbe> {
    if !(c0 > 0.0) {
        return Err(Error::domain("probe_binomial_exp", format!("c0 must be positive, got {c0}")));
    }
    let ys = log_grid(1e2, 1e6, 12);
    let ts: Vec<f64> = (0..=4000).map(|i| 20.0 * i as f64 / 4000.0).collect();
    let mut per_decade = vec![0.0f64; 4];
    for &y in &ys {
        let d = ((y / 1e2).log10().floor() as usize).min(3);
        for &t in &ts {
            // The floor jumps just below multiples of 1/y dominate the error.
            for tt in [t, ((t * y).floor() + 1.0) / y - 1e-12 / y] {
                if tt > 20.0 {
                    continue;
                }
                let v = binomial_exp_error(y, tt)? * y * (tt / c0).exp();
                per_decade[d] = per_decade[d].max(v);
            }
        }
    }
    Ok(summarize(per_decade, c0))
}

/// Probe of `k_coeff_power_error(α, y)`: supremum over `[0, 1)` of the raw
/// error, and over `y ∈ [1, 10⁶]` of `error / y^{α-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProbe {
    pub alpha: f64,
    pub sup_below_one: f64,
    pub weighted: BoundProbe,
}

pub fn probe_k_coeff_power(alpha: f64) -> Result<PowerProbe> {
    let mut sup_below_one = 0.0f64;
    for i in 0..1000 {
        sup_below_one = sup_below_one.max(k_coeff_power_error(alpha, i as f64 / 1000.0)?);
    }
    let mut per_decade = vec![0.0f64; 6];
    for y in log_grid(1.0, 1e6, 60) {
        let d = (y.log10().floor() as usize).min(5);
        // Just below the next integer the floor lags furthest behind y.
        for yy in [y, y.floor() + 1.0 - 1e-9 * (y + 1.0)] {
            let v = k_coeff_power_error(alpha, yy)? / yy.powf(alpha - 1.0);
            per_decade[d] = per_decade[d].max(v);
        }
    }
    Ok(PowerProbe { alpha, sup_below_one, weighted: summarize(per_decade, 0.0) })
}
