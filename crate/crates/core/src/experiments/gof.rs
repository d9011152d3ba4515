//! Goodness-of-fit tests against fully specified laws.

use serde::{Deserialize, Serialize};

use crate::funcs::special::{inc_gamma_tails, normal_cdf};

/// Outcome of one test. `pass` holds when `p_value >= level`, equivalently
/// `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub test: String,
    pub statistic: f64,
    /// Critical value of the statistic at `level`, where available.
    pub threshold: f64,
    pub p_value: f64,
    pub level: f64,
    pub pass: bool,
    pub sample_size: usize,
    pub notes: String,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Limiting CDF of the Anderson–Darling statistic (Marsaglia & Marsaglia 2004).
fn ad_limit_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z < 2.0 {
        (-1.2337141 / z).exp() / z.sqrt()
            * (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z)
    } else {
        (-(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z).exp()).exp()
    }
}

/// Finite-sample correction to [`ad_limit_cdf`].
fn ad_error_fix(n: f64, x: f64) -> f64 {
    if x > 0.8 {
        return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) / n;
    }
    let c = 0.01265 + 0.1757 / n;
    if x < c {
        let t = x / c;
        let t = t.sqrt() * (1.0 - t) * (49.0 * t - 102.0);
        return t * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n;
    }
    let x = (x - c) / (0.8 - c);
    let t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * x) * x) * x) * x) * x;
    t * (0.04213 / n + 0.01365 / (n * n)) / n
}

/// `P(A² <= z)` for a sample of size `n` from the hypothesised law.
pub fn anderson_darling_cdf(n: usize, z: f64) -> f64 {
    let x = ad_limit_cdf(z);
    (x + ad_error_fix(n as f64, x)).clamp(0.0, 1.0)
}

/// Anderson–Darling test of `z` against the standard normal law.
pub fn anderson_darling_normal(z: &[f64], level: f64) -> GofReport {
    let n = z.len();
    let v = sorted(z);
    let nf = n as f64;
    let mut s = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let lo = normal_cdf(x).max(1e-300);
        let hi = normal_cdf(-v[n - 1 - i]).max(1e-300);
        s += (2.0 * i as f64 + 1.0) * (lo.ln() + hi.ln());
    }
    let a2 = -nf - s / nf;
    let p = 1.0 - anderson_darling_cdf(n, a2);
    GofReport {
        test: "anderson_darling".into(),
        statistic: a2,
        threshold: critical_value(|t| anderson_darling_cdf(n, t), level, 0.0, 50.0),
        p_value: p,
        level,
        pass: p >= level,
        sample_size: n,
        notes: "against N(0,1)".into(),
    }
}

/// `P(sup |F_n - F| > d)` by the Kolmogorov limit law with Stephens' small-sample correction.
pub fn kolmogorov_p_value(n: usize, d: f64) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Kolmogorov–Smirnov test of `xs` against the continuous CDF `cdf`.
pub fn kolmogorov_smirnov(xs: &[f64], cdf: impl Fn(f64) -> f64, level: f64, name: &str) -> GofReport {
    let v = sorted(xs);
    let n = v.len();
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 + 1.0) / nf - c).max(c - i as f64 / nf);
    }
    let p = kolmogorov_p_value(n, d);
    GofReport {
        test: name.into(),
        statistic: d,
        threshold: critical_value(|t| 1.0 - kolmogorov_p_value(n, t), level, 0.0, 1.0),
        p_value: p,
        level,
        pass: p >= level,
        sample_size: n,
        notes: String::new(),
    }
}

pub fn ks_normal(z: &[f64], level: f64) -> GofReport {
    let mut r = kolmogorov_smirnov(z, normal_cdf, level, "kolmogorov_smirnov");
    r.notes = "against N(0,1)".into();
    r
}

/// KS test of points in `[0, T]` against `(1 - e^{-νs}) / (1 - e^{-νT})`,
/// the law of the first point of a rate-`ν` Poisson process given that
/// `[0, T]` is not empty.
pub fn ks_first_point_exponential(first: &[f64], rate: f64, t: f64, level: f64) -> GofReport {
    let norm = -(-rate * t).exp_m1();
    let mut r = kolmogorov_smirnov(first, |s| (-(-rate * s.clamp(0.0, t)).exp_m1()) / norm, level, "first_point_exponential_ks");
    r.notes = format!("truncated exponential, rate {rate}, horizon {t}");
    r
}

/// Chi-square test of integer counts against Poisson(`mean`); adjacent bins
/// are merged until every expected frequency is at least 5.
pub fn chi_square_poisson(counts: &[u64], mean: f64, level: f64) -> GofReport {
    let n = counts.len();
    let nf = n as f64;
    let max = counts.iter().copied().max().unwrap_or(0) as usize;
    // Poisson pmf by recurrence, far enough to cover the sample.
    let top = max.max((mean + 10.0 * mean.sqrt() + 10.0) as usize);
    let mut pmf = Vec::with_capacity(top + 1);
    let mut p = (-mean).exp();
    for k in 0..=top {
        pmf.push(p);
        p *= mean / (k as f64 + 1.0);
    }
    let mut observed = vec![0u64; top + 1];
    for &c in counts {
        observed[c as usize] += 1;
    }
    // Bins [lo, hi); the last bin absorbs the upper tail.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut exp_acc, mut obs_acc) = (0.0, 0.0);
    for k in 0..=top {
        exp_acc += pmf[k] * nf;
        obs_acc += observed[k] as f64;
        if exp_acc >= 5.0 {
            bins.push((exp_acc, obs_acc));
            exp_acc = 0.0;
            obs_acc = 0.0;
        }
    }
    let tail_expected = (1.0 - pmf.iter().sum::<f64>()).max(0.0) * nf + exp_acc;
    match bins.last_mut() {
        Some(last) => {
            last.0 += tail_expected;
            last.1 += obs_acc;
        }
        None => bins.push((tail_expected, obs_acc)),
    }
    let stat: f64 = bins.iter().map(|&(e, o)| (o - e) * (o - e) / e).sum();
    let df = bins.len().saturating_sub(1).max(1) as f64;
    let p = inc_gamma_tails(df / 2.0, stat / 2.0).map(|t| t.upper).unwrap_or(f64::NAN);
    GofReport {
        test: "chi_square_poisson".into(),
        statistic: stat,
        threshold: critical_value(|x| inc_gamma_tails(df / 2.0, x / 2.0).map(|t| t.lower).unwrap_or(0.0), level, 0.0, 1e4),
        p_value: p,
        level,
        pass: p >= level,
        sample_size: n,
        notes: format!("{} bins, mean {mean}", bins.len()),
    }
}

/// Point where the increasing `cdf` reaches `1 - level`, by bisection.
fn critical_value(cdf: impl Fn(f64) -> f64, level: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < 1.0 - level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sample mean and unbiased variance, summed in order with compensation.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = crate::funcs::quad::compensated_sum(xs.iter().copied()) / n;
    let ss = crate::funcs::quad::compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
    (mean, ss / (n - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anderson_darling_quantiles() {
        // Known asymptotic quantiles of A²: 2.492 (95%), 3.857 (99%).
        assert!((ad_limit_cdf(2.492) - 0.95).abs() < 1e-3);
        assert!((ad_limit_cdf(3.857) - 0.99).abs() < 1e-3);
        let z: Vec<f64> = (0..1000).map(|i| (i as f64 - 499.5) / 300.0).collect();
        let r = anderson_darling_normal(&z, 0.01);
        assert!(r.statistic.is_finite());
        assert!((r.threshold - 3.857).abs() < 0.03, "{}", r.threshold);
    }

    #[test]
    fn kolmogorov_quantile() {
        // λ = 1.628 is the 1% point of the Kolmogorov law.
        let n = 10_000usize;
        let sn = (n as f64).sqrt();
        let d = 1.6276 / (sn + 0.12 + 0.11 / sn);
        assert!((kolmogorov_p_value(n, d) - 0.01).abs() < 2e-4);
    }

    #[test]
    fn normal_quantiles_pass() {
        // Exact normal quantiles form an ideal sample.
        let n = 2000;
        let z: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if normal_cdf(m) < p {
                        lo = m
                    } else {
                        hi = m
                    }
                }
                lo
            })
            .collect();
        assert!(anderson_darling_normal(&z, 0.01).pass);
        assert!(ks_normal(&z, 0.01).pass);
        let shifted: Vec<f64> = z.iter().map(|x| x + 0.3).collect();
        assert!(!anderson_darling_normal(&shifted, 0.01).pass);
    }

    #[test]
    fn chi_square_perfect_fit() {
        // Counts laid out in exact Poisson proportions.
        let mean = 3.0f64;
        let mut counts = Vec::new();
        let mut p = (-mean).exp();
        for k in 0..20u64 {
            let m = (p * 10_000.0).round() as usize;
            counts.extend(std::iter::repeat_n(k, m));
            p *= mean / (k as f64 + 1.0);
        }
        let r = chi_square_poisson(&counts, mean, 0.01);
        assert!(r.pass && r.p_value > 0.99, "{r:?}");
        assert!(!chi_square_poisson(&counts, 3.3, 0.01).pass);
    }
}
