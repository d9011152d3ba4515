//! Exact moments of linear statistics.
//!
//! The moduli are independent across indices, so for a step function `f`
//! every moment is a sum over the truncation range of per-index cell
//! probabilities, which are differences of radial CDFs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{predicted_limit, LimitKind, ScalingFamily, ScalingRegime};
use crate::ensembles::{CellMasses, Coordinate, Ensemble};
use crate::error::{Error, Result};
use crate::funcs::quad::{quad_1d, quad_2d, Box2, CompensatedSum, QuadratureSpec};
use crate::funcs::test_function::TestFunction;

/// Per-index sums for one or two step functions on a common set of cells.
#[derive(Debug, Clone, Copy, PartialEq)]
struct IndexSums {
    mean_f: f64,
    mean_g: f64,
    var_f: f64,
    var_g: f64,
    cov: f64,
    abs_mean: f64,
    magnitude: f64,
}

fn cell_values(f: &TestFunction, boundaries: &[f64]) -> Vec<f64> {
    boundaries.windows(2).map(|w| f.eval(w[0])).collect()
}

fn merged_boundaries(f: &TestFunction, g: &TestFunction) -> Vec<f64> {
    let mut b: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

fn scaled_cells(e: &Ensemble, boundaries: &[f64], r: f64, a_r: f64, eps: f64) -> Result<CellMasses> {
    CellMasses::new(e, Coordinate::Scaled { r, a_r }, boundaries, eps)
}

/// Accumulate moments over ascending indices with compensated sums.
fn index_sums(cells: &CellMasses, vf: &[f64], vg: &[f64]) -> IndexSums {
    let mut acc: [CompensatedSum; 7] = Default::default();
    for (_, row) in cells.rows() {
        let (mut ef, mut eg, mut ef2, mut eg2, mut efg, mut eabs) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&m, &a), &b) in row.iter().zip(vf).zip(vg) {
            ef += a * m;
            eg += b * m;
            ef2 += a * a * m;
            eg2 += b * b * m;
            efg += a * b * m;
            eabs += a.abs() * m;
        }
        acc[0].add(ef);
        acc[1].add(eg);
        acc[2].add(ef2 - ef * ef);
        acc[3].add(eg2 - eg * eg);
        acc[4].add(efg - ef * eg);
        acc[5].add(eabs);
        acc[6].add(ef2 + eg2 + eabs);
    }
    IndexSums {
        mean_f: acc[0].value(),
        mean_g: acc[1].value(),
        var_f: acc[2].value(),
        var_g: acc[3].value(),
        cov: acc[4].value(),
        abs_mean: acc[5].value(),
        magnitude: acc[6].value(),
    }
}

/// Exact mean and variance of `Σ_k v_k · #(points in cell k)`.
pub(crate) fn cell_moments(cells: &CellMasses, values: &[f64]) -> (f64, f64) {
    let s = index_sums(cells, values, values);
    (s.mean_f, s.var_f)
}

fn sums_for(e: &Ensemble, f: &TestFunction, r: f64, a_r: f64, eps: f64) -> Result<(IndexSums, CellMasses)> {
    check_scale(r, a_r)?;
    let cells = scaled_cells(e, f.breakpoints(), r, a_r, eps)?;
    let v = cell_values(f, cells.boundaries());
    Ok((index_sums(&cells, &v, &v), cells))
}

fn check_scale(r: f64, a_r: f64) -> Result<()> {
    if !r.is_finite() || !(a_r > 0.0) || !a_r.is_finite() {
        return Err(Error::invalid(format!("need finite R and positive finite a_R, got R={r}, a_R={a_r}")));
    }
    Ok(())
}

/// `E Σ f(a_R(coord(z) - R))`, with indices outside a range of certified
/// missing mass `eps` dropped.
pub fn exact_mean(e: &Ensemble, f: &TestFunction, r: f64, a_r: f64, eps: f64) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    Ok(sums_for(e, f, r, a_r, eps)?.0.mean_f)
}

/// `Var Σ f(a_R(coord(z) - R))` as `Σ_n (E f² - (E f)²)`.
pub fn exact_variance(e: &Ensemble, f: &TestFunction, r: f64, a_r: f64, eps: f64) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    Ok(sums_for(e, f, r, a_r, eps)?.0.var_f)
}

/// Variances and covariance of two statistics computed from the same
/// per-index sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub var_f: f64,
    pub var_g: f64,
    pub cov: f64,
    /// `Var(f + g)` summed directly.
    pub var_sum: f64,
}

pub fn exact_covariance(e: &Ensemble, f: &TestFunction, g: &TestFunction, r: f64, a_r: f64, eps: f64) -> Result<CovarianceReport> {
    check_scale(r, a_r)?;
    let b = merged_boundaries(f, g);
    let cells = scaled_cells(e, &b, r, a_r, eps)?;
    let vf = cell_values(f, &b);
    let vg = cell_values(g, &b);
    let vs: Vec<f64> = vf.iter().zip(&vg).map(|(x, y)| x + y).collect();
    let s = index_sums(&cells, &vf, &vg);
    let var_sum = index_sums(&cells, &vs, &vs).var_f;
    Ok(CovarianceReport { var_f: s.var_f, var_g: s.var_g, cov: s.cov, var_sum })
}

/// Exact and leading-order moments of one statistic at one `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    pub mean_exact: f64,
    pub var_exact: f64,
    pub mean_asymptotic: f64,
    pub var_asymptotic: f64,
    pub n_min: i64,
    pub n_max: i64,
    pub truncation_mass: f64,
    /// Bound on the floating-point error of the exact sums; no quadrature is
    /// involved for step functions.
    pub quadrature_error: f64,
}

impl MomentReport {
    pub const CSV_HEADER: &'static str = "R,a_R,mean_exact,var_exact,mean_asym,var_asym,trunc_mass";

    pub fn write_csv_row<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.r, self.a_r, self.mean_exact, self.var_exact, self.mean_asymptotic, self.var_asymptotic, self.truncation_mass
        )
    }
}

/// Exact moments alongside the leading-order moments of the predicted limit.
pub fn moment_report(
    e: &Ensemble,
    f: &TestFunction,
    r: f64,
    family: ScalingFamily,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<MomentReport> {
    let regime = ScalingRegime::classify(e, family)?;
    let a_r = family.scale_at(e, r);
    let (sums, cells) = sums_for(e, f, r, a_r, eps)?;
    let ints = f.integrals();
    let (mean_asymptotic, var_asymptotic) = match predicted_limit(e, &regime, f, r, spec)?.kind {
        LimitKind::Gaussian { centering, scale, variance } | LimitKind::WhiteNoise { centering, scale, variance } => {
            (centering, scale * variance)
        }
        LimitKind::Poisson { intensity } => (intensity * ints.integral, intensity * ints.square),
        LimitKind::Degenerate { variance_envelope } => (crate::asymptotics::intensity_mean(e, f, r, a_r), variance_envelope),
    };
    let range = cells.range();
    Ok(MomentReport {
        r,
        a_r,
        mean_exact: sums.mean_f,
        var_exact: sums.var_f,
        mean_asymptotic,
        var_asymptotic,
        n_min: range.n_min,
        n_max: range.n_max,
        truncation_mass: range.mass_bound,
        quadrature_error: 8.0 * f64::EPSILON * sums.magnitude,
    })
}

/// Ginibre `Var Σ f(|z| - R)` from the two-point kernel: with `P = (R+x)(R+y)`,
/// `(2/π) ∫∫ [f(x) - f(y)]² e^{-(x-y)²} √P ∫_0^{π√P} e^{-4P sin²(t/(2√P))} dt dx dy`
/// over `x, y ≥ -R`.
pub fn ginibre_variance_integral(f: &TestFunction, r: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("ginibre_variance_integral", format!("R must be positive and finite, got {r}")));
    }
    spec.validate()?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let inner_spec = spec.scaled(0.01);
    // sin s ≥ 2s/π on [0, π/2] bounds the integrand by e^{-4t²/π²}, below 1e-25 past t = 12.
    let angular = |p: f64| -> f64 {
        let sp = p.sqrt();
        let top = (std::f64::consts::PI * sp).min(12.0);
        let g = |t: f64| {
            let s = (t / (2.0 * sp)).sin();
            (-4.0 * p * s * s).exp()
        };
        let v = quad_1d(g, 0.0, top, &inner_spec).map(|q| q.value).unwrap_or(f64::NAN);
        sp * v
    };
    let mut cuts: Vec<f64> = vec![-r];
    cuts.extend(f.breakpoints().iter().copied().filter(|&b| b > -r));
    cuts.push(f64::INFINITY);
    let cells: Vec<(f64, f64, f64)> = cuts.windows(2).map(|w| (w[0], w[1], f.eval(w[0]))).collect();
    let mut total = CompensatedSum::new();
    for (j, &(a, b, vj)) in cells.iter().enumerate() {
        for &(c, d, vi) in &cells[..j] {
            let dv = vi - vj;
            if dv == 0.0 {
                continue;
            }
            let g = |x: f64, y: f64| {
                let gap = x - y;
                (-gap * gap).exp() * angular((r + x) * (r + y))
            };
            let q = quad_2d(g, Box2::new((a, b), (c, d)), spec)?;
            if !q.value.is_finite() {
                return Err(Error::Quadrature { value: q.value, error: q.error, subdivisions: spec.max_subdivisions });
            }
            total.add(dv * dv * q.value);
        }
    }
    Ok(2.0 * 2.0 / std::f64::consts::PI * total.value())
}

/// Quantities entering the classical sufficient conditions for a CLT of
/// determinantal linear statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoshnikovDiagnostics {
    pub var: f64,
    pub sup_f: f64,
    pub mean_abs: f64,
    /// `E S_|f| / Var S_f`.
    pub mean_abs_over_var: f64,
    /// `sup |f| / (Var S_f)^{0.1}`.
    pub sup_over_var_power: f64,
}

pub fn soshnikov_diagnostics(e: &Ensemble, f: &TestFunction, r: f64, a_r: f64, eps: f64) -> Result<SoshnikovDiagnostics> {
    if f.is_zero() {
        return Ok(SoshnikovDiagnostics { var: 0.0, sup_f: 0.0, mean_abs: 0.0, mean_abs_over_var: 0.0, sup_over_var_power: 0.0 });
    }
    let (s, _) = sums_for(e, f, r, a_r, eps)?;
    let sup_f = f.sup_abs();
    Ok(SoshnikovDiagnostics {
        var: s.var_f,
        sup_f,
        mean_abs: s.abs_mean,
        mean_abs_over_var: s.abs_mean / s.var_f,
        sup_over_var_power: sup_f / s.var_f.powf(0.1),
    })
}

/// Exact ingredients of the avoidance-functional argument for the Poisson limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonDiagnostics {
    /// `Σ_n E f(X_n)`.
    pub sum_means: f64,
    /// `sup_n P(X_n ∈ supp f)`.
    pub sup_single: f64,
    /// `|Π_n (1 - E f(X_n)) - exp(-Σ_n E f(X_n))|`.
    pub avoidance_gap: f64,
}

pub fn poisson_limit_diagnostics(e: &Ensemble, r: f64, a_r: f64, f: &TestFunction, eps: f64) -> Result<PoissonDiagnostics> {
    if f.values().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::invalid("avoidance diagnostics need 0 <= f <= 1"));
    }
    let (_, cells) = sums_for(e, f, r, a_r, eps)?;
    let v = cell_values(f, cells.boundaries());
    let mut sum = CompensatedSum::new();
    let mut log_prod = CompensatedSum::new();
    let mut sup_single = 0.0f64;
    for (_, row) in cells.rows() {
        let (mut m, mut hit) = (0.0, 0.0);
        for (&p, &val) in row.iter().zip(&v) {
            m += val * p;
            if val != 0.0 {
                hit += p;
            }
        }
        sum.add(m);
        log_prod.add((-m).ln_1p());
        sup_single = sup_single.max(hit);
    }
    let sum_means = sum.value();
    Ok(PoissonDiagnostics { sum_means, sup_single, avoidance_gap: (log_prod.value().exp() - (-sum_means).exp()).abs() })
}
