//! Monte Carlo runners, one per limit regime.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gof::{anderson_darling_normal, chi_square_poisson, ks_first_point_exponential, ks_normal, mean_var, GofReport};
use super::plan::ExperimentPlan;
use crate::asymptotics::{
    growth_scale, jump_variance, predicted_limit, statistic_vanishes, variance_envelope, LimitKind, RegimeClass, ScalingRegime,
};
use crate::ensembles::{CellMasses, Coordinate, ReplicateRng, Strategy, WindowSampler};
use crate::error::{Error, Result};
use crate::funcs::quad::{CompensatedSum, QuadratureSpec};
use crate::funcs::test_function::TestFunction;
use crate::oracle::cell_moments;

/// Raw statistic of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate_id: u64,
    pub raw_stat: f64,
    pub standardized_stat: f64,
    pub count: u64,
}

pub const REPLICATE_CSV_HEADER: &str = "replicate_id,raw_stat,standardized_stat,count";

pub fn write_replicate_csv<W: Write>(rows: &[ReplicateRow], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "{REPLICATE_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{:.16e},{:.16e},{}", r.replicate_id, r.raw_stat, r.standardized_stat, r.count)?;
    }
    Ok(())
}

fn regime_for(plan: &ExperimentPlan) -> Result<ScalingRegime> {
    plan.validate()?;
    ScalingRegime::classify(&plan.ensemble, plan.scaling)
}

fn wrong_regime(expected: &str, got: RegimeClass) -> Error {
    Error::Rejected(format!("this experiment needs a {expected} scaling, but the declared family is {got:?}"))
}

fn cell_values(f: &TestFunction, boundaries: &[f64]) -> Vec<f64> {
    boundaries.windows(2).map(|w| f.eval(w[0])).collect()
}

fn weighted(counts: &[u64], values: &[f64]) -> f64 {
    let mut s = CompensatedSum::new();
    for (&c, &v) in counts.iter().zip(values) {
        if c > 0 {
            s.add(c as f64 * v);
        }
    }
    s.value()
}

/// Counts per cell for replicates `0..n`, in replicate order.
fn replicate_counts(sampler: &WindowSampler, n: u64) -> Vec<Vec<u64>> {
    (0..n).into_par_iter().map(|rid| sampler.sample_counts(rid)).collect()
}

/// Uniform `(-δ/2, δ/2)` offset that turns a lattice-valued statistic into a
/// continuous one; its own stream keeps the sample itself unchanged.
fn lattice_jitter(seed: u64, rid: u64, delta: Option<f64>) -> f64 {
    match delta {
        Some(d) => (ReplicateRng::new(seed, rid).jitter().random::<f64>() - 0.5) * d,
        None => 0.0,
    }
}

struct Standardized {
    rows: Vec<ReplicateRow>,
    raw: Vec<f64>,
    z: Vec<f64>,
}

/// Standardize `raw` by `(x + jitter - mean) / √(var + δ²/12)`.
fn standardize(raw: Vec<f64>, counts: &[u64], plan: &ExperimentPlan, delta: Option<f64>, mean: f64, var: f64) -> Standardized {
    let sd = (var + delta.map_or(0.0, |d| d * d / 12.0)).sqrt();
    let z: Vec<f64> =
        raw.iter().enumerate().map(|(i, &x)| (x + lattice_jitter(plan.seed, i as u64, delta) - mean) / sd).collect();
    let rows = raw
        .iter()
        .zip(&z)
        .zip(counts)
        .enumerate()
        .map(|(i, ((&raw_stat, &standardized_stat), &count))| ReplicateRow { replicate_id: i as u64, raw_stat, standardized_stat, count })
        .collect();
    Standardized { rows, raw, z }
}

fn verdict(plan: &ExperimentPlan, pass: bool) -> Option<bool> {
    (!plan.exploratory).then_some(pass)
}

/// Fixed-scale CLT at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltLevel {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    pub replicates: u64,
    pub mean_exact: f64,
    pub var_exact: f64,
    pub mean_predicted: f64,
    /// `scale · V` of the predicted Gaussian.
    pub var_predicted: f64,
    pub empirical_mean: f64,
    pub empirical_var: f64,
    /// `empirical_var / var_predicted`.
    pub var_ratio: f64,
    /// `var_exact / var_predicted`.
    pub exact_var_ratio: f64,
    /// `(empirical_mean - mean_exact)` in standard errors.
    pub mean_deviation_se: f64,
    pub lattice: Option<f64>,
    pub anderson_darling: GofReport,
    pub kolmogorov_smirnov: GofReport,
    #[serde(skip)]
    pub rows: Vec<ReplicateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub experiment: String,
    pub levels: Vec<CltLevel>,
    pub pass: Option<bool>,
}

/// Sampler over the pieces of `f` in the scaled coordinate.
fn sampler_for(plan: &ExperimentPlan, boundaries: &[f64], r: f64, a_r: f64) -> Result<WindowSampler> {
    let cells = CellMasses::new(&plan.ensemble, Coordinate::Scaled { r, a_r }, boundaries, plan.eps_trunc)?;
    Ok(WindowSampler::from_cells(cells, Strategy::Auto, plan.seed))
}

pub fn run_clt(plan: &ExperimentPlan) -> Result<CltReport> {
    let regime = regime_for(plan)?;
    if !matches!(regime.class, RegimeClass::FixedScale { .. }) {
        return Err(wrong_regime("fixed", regime.class));
    }
    if plan.f.is_zero() {
        return Err(Error::Rejected("f vanishes identically: the statistic has zero variance".into()));
    }
    plan.require_gof_power()?;
    let spec = QuadratureSpec::default();
    let e = plan.ensemble;
    let mut levels = Vec::new();
    for &r in &plan.r_ladder {
        let a_r = plan.scaling.scale_at(&e, r);
        let LimitKind::Gaussian { centering, scale, variance } = predicted_limit(&e, &regime, &plan.f, r, &spec)?.kind else {
            unreachable!("fixed scale predicts a Gaussian")
        };
        let var_predicted = scale * variance;
        let sampler = sampler_for(plan, plan.f.breakpoints(), r, a_r)?;
        let values = cell_values(&plan.f, sampler.cells().boundaries());
        let (mean_exact, var_exact) = cell_moments(sampler.cells(), &values);
        let counts = replicate_counts(&sampler, plan.replicates);
        let raw: Vec<f64> = counts.iter().map(|c| weighted(c, &values)).collect();
        let totals: Vec<u64> = counts.iter().map(|c| c.iter().sum()).collect();
        let delta = plan.f.value_lattice();
        let s = standardize(raw, &totals, plan, delta, mean_exact, var_predicted);
        let (m, v) = mean_var(&s.raw);
        let n = plan.replicates as f64;
        levels.push(CltLevel {
            r,
            a_r,
            replicates: plan.replicates,
            mean_exact,
            var_exact,
            mean_predicted: centering,
            var_predicted,
            empirical_mean: m,
            empirical_var: v,
            var_ratio: v / var_predicted,
            exact_var_ratio: var_exact / var_predicted,
            mean_deviation_se: (m - mean_exact) / (var_exact / n).sqrt(),
            lattice: delta,
            anderson_darling: anderson_darling_normal(&s.z, plan.level),
            kolmogorov_smirnov: ks_normal(&s.z, plan.level),
            rows: s.rows,
        });
    }
    let pass = levels.iter().all(|l| l.anderson_darling.pass);
    Ok(CltReport { experiment: "clt".into(), levels, pass: verdict(plan, pass) })
}

/// White-noise CLT at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteNoiseLevel {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    pub replicates: u64,
    pub mean_exact: f64,
    pub var_exact: f64,
    /// Empirical variance of `√(a_R / scale) · S_f`.
    pub normalized_var: f64,
    /// Exact variance under the same normalization.
    pub normalized_var_exact: f64,
    /// `2 ∫ f²`.
    pub predicted_var: f64,
    pub var_ratio: f64,
    /// Empirical correlation of `S_f` and `S_g`.
    pub correlation: f64,
    /// Exact correlation of `S_f` and `S_g`.
    pub correlation_exact: f64,
    pub mean_deviation_se: f64,
    pub anderson_darling: GofReport,
    pub kolmogorov_smirnov: GofReport,
    #[serde(skip)]
    pub rows: Vec<ReplicateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteNoiseReport {
    pub experiment: String,
    pub levels: Vec<WhiteNoiseLevel>,
    pub pass: Option<bool>,
}

fn merged(f: &TestFunction, g: &TestFunction) -> Vec<f64> {
    let mut b: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

pub fn run_whitenoise(plan: &ExperimentPlan) -> Result<WhiteNoiseReport> {
    let regime = regime_for(plan)?;
    if regime.class != RegimeClass::WhiteNoise {
        return Err(wrong_regime("white-noise", regime.class));
    }
    let g = plan.g.as_ref().ok_or_else(|| Error::invalid("white-noise experiment needs a second function g"))?;
    if plan.f.is_zero() || g.is_zero() {
        return Err(Error::Rejected("f and g must both be nonzero for a correlation to be defined".into()));
    }
    if !plan.f.disjoint_from(g) {
        return Err(Error::Rejected("f and g must have disjoint supports".into()));
    }
    plan.require_gof_power()?;
    let e = plan.ensemble;
    let mut levels = Vec::new();
    for &r in &plan.r_ladder {
        let a_r = plan.scaling.scale_at(&e, r);
        let boundaries = merged(&plan.f, g);
        let sampler = sampler_for(plan, &boundaries, r, a_r)?;
        let vf = cell_values(&plan.f, &boundaries);
        let vg = cell_values(g, &boundaries);
        let (mean_exact, var_exact) = cell_moments(sampler.cells(), &vf);
        let (_, var_g_exact) = cell_moments(sampler.cells(), &vg);
        let sum: Vec<f64> = vf.iter().zip(&vg).map(|(a, b)| a + b).collect();
        let (_, var_sum_exact) = cell_moments(sampler.cells(), &sum);
        let counts = replicate_counts(&sampler, plan.replicates);
        let sf: Vec<f64> = counts.iter().map(|c| weighted(c, &vf)).collect();
        let sg: Vec<f64> = counts.iter().map(|c| weighted(c, &vg)).collect();
        let in_f: Vec<u64> = counts.iter().map(|c| c.iter().zip(&vf).filter(|(_, v)| **v != 0.0).map(|(c, _)| c).sum()).collect();
        let (mf, vfe) = mean_var(&sf);
        let (mg, vge) = mean_var(&sg);
        let cov = CompensatedSum::from_iter(sf.iter().zip(&sg).map(|(x, y)| (x - mf) * (y - mg))).value()
            / (plan.replicates as f64 - 1.0);
        let norm = a_r / growth_scale(&e, r)?;
        let predicted_var = 2.0 * plan.f.integrals().square;
        let s = standardize(sf, &in_f, plan, plan.f.value_lattice(), mean_exact, var_exact);
        let n = plan.replicates as f64;
        levels.push(WhiteNoiseLevel {
            r,
            a_r,
            replicates: plan.replicates,
            mean_exact,
            var_exact,
            normalized_var: vfe * norm,
            normalized_var_exact: var_exact * norm,
            predicted_var,
            var_ratio: vfe * norm / predicted_var,
            correlation: cov / (vfe * vge).sqrt(),
            correlation_exact: 0.5 * (var_sum_exact - var_exact - var_g_exact) / (var_exact * var_g_exact).sqrt(),
            mean_deviation_se: (mf - mean_exact) / (var_exact / n).sqrt(),
            anderson_darling: anderson_darling_normal(&s.z, plan.level),
            kolmogorov_smirnov: ks_normal(&s.z, plan.level),
            rows: s.rows,
        });
    }
    let bound = 3.0 / (plan.replicates as f64).sqrt() + 0.02;
    let pass = levels.iter().all(|l| l.anderson_darling.pass && l.correlation.abs() <= bound);
    Ok(WhiteNoiseReport { experiment: "whitenoise".into(), levels, pass: verdict(plan, pass) })
}

/// Poisson limit at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonLevel {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    pub replicates: u64,
    pub intensity: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    /// `intensity · T`.
    pub expected_count: f64,
    /// Exact finite-`R` mean count.
    pub mean_exact: f64,
    pub mean_count: f64,
    pub var_count: f64,
    /// `var_count / mean_count`.
    pub dispersion: f64,
    /// `√(expected_count / replicates)`.
    pub standard_error: f64,
    pub mean_within_3se: bool,
    pub chi_square: GofReport,
    /// Absent when no replicate has a point in `[0, T]`.
    pub first_point: Option<GofReport>,
    #[serde(skip)]
    pub rows: Vec<ReplicateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub experiment: String,
    pub levels: Vec<PoissonLevel>,
    pub pass: Option<bool>,
}

pub fn run_poisson(plan: &ExperimentPlan) -> Result<PoissonReport> {
    let regime = regime_for(plan)?;
    let RegimeClass::Extreme { intensity } = regime.class else {
        return Err(wrong_regime("extreme", regime.class));
    };
    let t = plan.horizon.ok_or_else(|| Error::invalid("Poisson experiment needs a horizon T"))?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("horizon T must be positive and finite, got {t}")));
    }
    plan.require_gof_power()?;
    let e = plan.ensemble;
    let mut levels = Vec::new();
    for &r in &plan.r_ladder {
        let a_r = plan.scaling.scale_at(&e, r);
        let sampler = sampler_for(plan, &[0.0, t], r, a_r)?;
        let (mean_exact, _) = cell_moments(sampler.cells(), &[1.0]);
        let samples: Vec<(u64, Option<f64>)> = (0..plan.replicates)
            .into_par_iter()
            .map(|rid| {
                let s = sampler.sample(rid)?;
                let first = s.points.iter().map(|p| p.value).min_by(f64::total_cmp);
                Ok((s.len() as u64, first))
            })
            .collect::<Result<_>>()?;
        let counts: Vec<u64> = samples.iter().map(|s| s.0).collect();
        let firsts: Vec<f64> = samples.iter().filter_map(|s| s.1).collect();
        let expected = intensity * t;
        let raw: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let (m, v) = mean_var(&raw);
        let rows = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| ReplicateRow {
                replicate_id: i as u64,
                raw_stat: c as f64,
                standardized_stat: (c as f64 - expected) / expected.sqrt(),
                count: c,
            })
            .collect();
        let se = (expected / plan.replicates as f64).sqrt();
        levels.push(PoissonLevel {
            r,
            a_r,
            replicates: plan.replicates,
            intensity,
            horizon: t,
            expected_count: expected,
            mean_exact,
            mean_count: m,
            var_count: v,
            dispersion: if m > 0.0 { v / m } else { f64::NAN },
            standard_error: se,
            mean_within_3se: (m - expected).abs() <= 3.0 * se,
            chi_square: chi_square_poisson(&counts, expected, plan.level),
            first_point: (!firsts.is_empty()).then(|| ks_first_point_exponential(&firsts, intensity, t, plan.level)),
            rows,
        });
    }
    let pass = levels
        .iter()
        .all(|l| l.mean_within_3se && l.chi_square.pass && l.first_point.as_ref().is_none_or(|k| k.pass));
    Ok(PoissonReport { experiment: "poisson".into(), levels, pass: verdict(plan, pass) })
}

/// Vanishing-scale CLT at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpLevel {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    pub replicates: u64,
    pub mean_exact: f64,
    pub var_exact: f64,
    /// Leading-order variance from the jumps of `f`.
    pub var_jump_asymptotic: f64,
    /// `var_exact / var_jump_asymptotic`.
    pub asymptotic_ratio: f64,
    pub empirical_var: f64,
    /// `empirical_var / var_exact`.
    pub var_ratio: f64,
    pub mean_deviation_se: f64,
    pub anderson_darling: GofReport,
    pub kolmogorov_smirnov: GofReport,
    #[serde(skip)]
    pub rows: Vec<ReplicateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub experiment: String,
    pub levels: Vec<JumpLevel>,
    pub pass: Option<bool>,
}

pub fn run_superexp(plan: &ExperimentPlan) -> Result<JumpReport> {
    let regime = regime_for(plan)?;
    if regime.class != RegimeClass::Vanishing {
        return Err(wrong_regime("vanishing (a_R → 0)", regime.class));
    }
    match plan.f.left_limit_at_right_endpoint() {
        Some(h) if h != 0.0 => {}
        _ => return Err(Error::Rejected("f needs a nonzero left limit at the right end of its support".into())),
    }
    plan.require_gof_power()?;
    let e = plan.ensemble;
    let spec = QuadratureSpec::default();
    let mut levels = Vec::new();
    for &r in &plan.r_ladder {
        let a_r = plan.scaling.scale_at(&e, r);
        if statistic_vanishes(&plan.f, r, a_r) {
            return Err(Error::Rejected(format!(
                "at R = {r} the statistic is identically zero (support of f lies below -R·a_R); use the zero check instead"
            )));
        }
        let sampler = sampler_for(plan, plan.f.breakpoints(), r, a_r)?;
        let values = cell_values(&plan.f, sampler.cells().boundaries());
        let (mean_exact, var_exact) = cell_moments(sampler.cells(), &values);
        let counts = replicate_counts(&sampler, plan.replicates);
        let raw: Vec<f64> = counts.iter().map(|c| weighted(c, &values)).collect();
        let totals: Vec<u64> = counts.iter().map(|c| c.iter().sum()).collect();
        let s = standardize(raw, &totals, plan, plan.f.value_lattice(), mean_exact, var_exact);
        let (m, v) = mean_var(&s.raw);
        let jump = jump_variance(&e, &plan.f, r, a_r, &spec)?;
        levels.push(JumpLevel {
            r,
            a_r,
            replicates: plan.replicates,
            mean_exact,
            var_exact,
            var_jump_asymptotic: jump,
            asymptotic_ratio: var_exact / jump,
            empirical_var: v,
            var_ratio: v / var_exact,
            mean_deviation_se: (m - mean_exact) / (var_exact / plan.replicates as f64).sqrt(),
            anderson_darling: anderson_darling_normal(&s.z, plan.level),
            kolmogorov_smirnov: ks_normal(&s.z, plan.level),
            rows: s.rows,
        });
    }
    let pass = levels.iter().all(|l| l.anderson_darling.pass);
    Ok(JumpReport { experiment: "superexp".into(), levels, pass: verdict(plan, pass) })
}

/// Monte Carlo confirmation that a statistic is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroLevel {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    pub replicates: u64,
    pub predicted_zero: bool,
    /// Replicates with a nonzero statistic.
    pub nonzero: u64,
    pub max_abs: f64,
    #[serde(skip)]
    pub rows: Vec<ReplicateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroReport {
    pub experiment: String,
    pub levels: Vec<ZeroLevel>,
    pub pass: Option<bool>,
}

pub fn zero_statistic_check(plan: &ExperimentPlan) -> Result<ZeroReport> {
    plan.validate()?;
    let e = plan.ensemble;
    let mut levels = Vec::new();
    for &r in &plan.r_ladder {
        let a_r = plan.scaling.scale_at(&e, r);
        let sampler = sampler_for(plan, plan.f.breakpoints(), r, a_r)?;
        let values = cell_values(&plan.f, sampler.cells().boundaries());
        let counts = replicate_counts(&sampler, plan.replicates);
        let rows: Vec<ReplicateRow> = counts
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let raw = weighted(c, &values);
                ReplicateRow { replicate_id: i as u64, raw_stat: raw, standardized_stat: raw, count: c.iter().sum() }
            })
            .collect();
        levels.push(ZeroLevel {
            r,
            a_r,
            replicates: plan.replicates,
            predicted_zero: statistic_vanishes(&plan.f, r, a_r),
            nonzero: rows.iter().filter(|r| r.raw_stat != 0.0).count() as u64,
            max_abs: rows.iter().fold(0.0, |m, r| m.max(r.raw_stat.abs())),
            rows,
        });
    }
    let pass = levels.iter().all(|l| l.predicted_zero && l.nonzero == 0);
    Ok(ZeroReport { experiment: "zero".into(), levels, pass: verdict(plan, pass) })
}

/// Exact variance against its vanishing envelope at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateLevel {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    pub var_exact: f64,
    pub envelope: f64,
    /// `var_exact / envelope`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateReport {
    pub experiment: String,
    pub levels: Vec<DegenerateLevel>,
    /// `var(R_{i+1}) / var(R_i)` along the ladder.
    pub step_ratios: Vec<f64>,
    pub decreasing: bool,
    /// Every variance is at most 1.2 times its envelope.
    pub within_envelope: bool,
    pub pass: Option<bool>,
}

pub fn degenerate_check(plan: &ExperimentPlan) -> Result<DegenerateReport> {
    let regime = regime_for(plan)?;
    if regime.class != RegimeClass::Degenerate {
        return Err(wrong_regime("degenerate (a_R beyond the critical scale)", regime.class));
    }
    let e = plan.ensemble;
    let mut levels = Vec::new();
    for &r in &plan.r_ladder {
        let a_r = plan.scaling.scale_at(&e, r);
        let var_exact = crate::oracle::exact_variance(&e, &plan.f, r, a_r, plan.eps_trunc)?;
        let envelope = variance_envelope(&e, &plan.f, r, a_r)?;
        levels.push(DegenerateLevel { r, a_r, var_exact, envelope, ratio: if envelope > 0.0 { var_exact / envelope } else { 0.0 } });
    }
    let step_ratios: Vec<f64> = levels.windows(2).map(|w| w[1].var_exact / w[0].var_exact).collect();
    let decreasing = levels.windows(2).all(|w| w[1].var_exact <= w[0].var_exact);
    let within_envelope = levels.iter().all(|l| l.var_exact <= 1.2 * l.envelope);
    Ok(DegenerateReport {
        experiment: "degenerate".into(),
        levels,
        step_ratios,
        decreasing,
        within_envelope,
        pass: verdict(plan, decreasing && within_envelope),
    })
}
