//! Certified index truncation and fast per-index CDF evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ensemble::{radial_tails, CdfStep, Ensemble, SquaredRadius};
use super::window::{Band, Window};
use crate::error::{Error, Result};
use crate::funcs::special::Tails;

/// Largest index the truncation search will consider.
pub const MAX_INDEX: u64 = 1_000_000_000;

/// Inclusive index range `[n_min, n_max]` (empty when `n_max < n_min`) with a
/// certified bound on the expected number of window points from indices
/// outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRange {
    pub n_min: i64,
    pub n_max: i64,
    pub mass_bound: f64,
}

impl TruncationRange {
    pub fn empty(mass_bound: f64) -> Self {
        TruncationRange { n_min: 0, n_max: -1, mass_bound }
    }

    pub fn is_empty(&self) -> bool {
        self.n_max < self.n_min
    }

    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.n_max - self.n_min + 1) as u64
        }
    }

    pub fn indices(&self) -> std::ops::Range<u64> {
        if self.is_empty() {
            0..0
        } else {
            self.n_min as u64..self.n_max as u64 + 1
        }
    }

    /// The same range widened by `k` indices on each side.
    pub fn widened(&self, k: u64) -> Self {
        if self.is_empty() {
            return *self;
        }
        TruncationRange { n_min: (self.n_min - k as i64).max(0), n_max: self.n_max + k as i64, mass_bound: self.mass_bound }
    }
}

/// Upper bound on `Σ_{n > big_n} P(ρ_n² ≤ hi)`.
///
/// Uses `F_{n+1}/F_n ≤ u/(n+1)` (Ginibre) and `≤ u (n+1+α)/(n+1)`
/// (hyperbolic), both from `t^{a-1} ≤ u t^{a-2}` under the integral.
fn upper_tail_bound(e: &Ensemble, hi: SquaredRadius, big_n: u64) -> Result<f64> {
    let n1 = big_n as f64 + 1.0;
    let ratio = match e {
        Ensemble::Ginibre => hi.u / (n1 + 1.0),
        Ensemble::Hyperbolic { alpha } => hi.u * (n1 + 1.0 + alpha) / (n1 + 1.0),
    };
    if ratio >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let first = radial_tails(e, big_n + 1, hi)?.lower;
    Ok(first / (1.0 - ratio))
}

/// Upper bound on `Σ_{n < m} P(ρ_n² > lo)`.
///
/// Uses `S_{n-1}/S_n ≤ n/u` (Ginibre) and `≤ n/((n+α) u)` (hyperbolic).
fn lower_tail_bound(e: &Ensemble, lo: SquaredRadius, m: u64) -> Result<f64> {
    if m == 0 {
        return Ok(0.0);
    }
    if lo.u <= 0.0 {
        return Ok(m as f64);
    }
    let top = (m - 1) as f64;
    let ratio = match e {
        Ensemble::Ginibre => top / lo.u,
        Ensemble::Hyperbolic { alpha } => top / ((top + alpha) * lo.u),
    };
    if ratio >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let last = radial_tails(e, m - 1, lo)?.upper;
    Ok(last / (1.0 - ratio))
}

/// Index range outside of which the expected number of points falling in
/// `band` is at most `eps`.
pub fn truncation_range_for_band(e: &Ensemble, band: Option<Band>, eps: f64) -> Result<TruncationRange> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("truncation tolerance must be positive, got {eps}")));
    }
    let Some(band) = band else {
        return Ok(TruncationRange::empty(0.0));
    };
    if eps >= 1.0 {
        return Ok(TruncationRange::empty(e.expected_count(band.lo, band.hi)));
    }
    let half = 0.5 * eps;

    // Smallest N with the upper tail certified below eps/2: doubling, then bisection.
    let ok_hi = |n: u64| upper_tail_bound(e, band.hi, n).map(|b| b <= half);
    let mut hi_n = 0u64;
    if !ok_hi(0)? {
        let mut step = 1u64;
        let mut lo_n;
        loop {
            lo_n = hi_n;
            hi_n = hi_n.saturating_add(step);
            if hi_n > MAX_INDEX {
                return Err(Error::Truncation(format!(
                    "tolerance {eps:e} not reachable with indices up to {MAX_INDEX}; the window is too close to the edge of the spectrum"
                )));
            }
            if ok_hi(hi_n)? {
                break;
            }
            step *= 2;
        }
        while hi_n - lo_n > 1 {
            let mid = lo_n + (hi_n - lo_n) / 2;
            if ok_hi(mid)? {
                hi_n = mid;
            } else {
                lo_n = mid;
            }
        }
    }
    let n_max = hi_n;

    // Largest M <= n_max + 1 with the lower tail certified below eps/2.
    let ok_lo = |m: u64| lower_tail_bound(e, band.lo, m).map(|b| b <= half);
    let (mut good, mut bad) = (0u64, n_max + 2);
    if ok_lo(n_max + 1)? {
        good = n_max + 1;
    } else {
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            if ok_lo(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
    }
    let n_min = good;
    let mass = lower_tail_bound(e, band.lo, n_min)? + upper_tail_bound(e, band.hi, n_max)?;
    if n_min > n_max {
        return Ok(TruncationRange::empty(mass));
    }
    Ok(TruncationRange { n_min: n_min as i64, n_max: n_max as i64, mass_bound: mass })
}

/// Index range for a window; see [`truncation_range_for_band`].
pub fn truncation_range(e: &Ensemble, w: &Window, eps: f64) -> Result<TruncationRange> {
    truncation_range_for_band(e, w.band(e)?, eps)
}

const SWEEP_CHUNK: u64 = 4096;

/// Tails of the laws of `ρ_n²` at `point` for every `n` in `[n_lo, n_hi)`.
///
/// Within fixed chunks of indices the CDFs are propagated by the exact
/// one-step recurrence, always in the direction in which the propagated tail
/// grows, from one direct evaluation per direction. The chunking is fixed so
/// the result does not depend on the thread count.
pub fn tails_sweep(e: &Ensemble, point: SquaredRadius, n_lo: u64, n_hi: u64) -> Result<Vec<Tails>> {
    if n_hi <= n_lo {
        return Ok(Vec::new());
    }
    let len = (n_hi - n_lo) as usize;
    if point.u <= 0.0 {
        return Ok(vec![Tails::ZERO; len]);
    }
    if matches!(e, Ensemble::Hyperbolic { .. }) && point.comp <= 0.0 {
        return Ok(vec![Tails::ONE; len]);
    }
    let step = CdfStep::new(e, point);
    let starts: Vec<u64> = (n_lo..n_hi).step_by(SWEEP_CHUNK as usize).collect();
    let chunks: Vec<Result<Vec<Tails>>> = starts
        .par_iter()
        .map(|&c0| {
            let c1 = (c0 + SWEEP_CHUNK).min(n_hi);
            sweep_chunk(e, point, &step, c0, c1)
        })
        .collect();
    let mut out = Vec::with_capacity(len);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

fn sweep_chunk(e: &Ensemble, point: SquaredRadius, step: &CdfStep, c0: u64, c1: u64) -> Result<Vec<Tails>> {
    let len = (c1 - c0) as usize;
    let mut out = vec![Tails::ZERO; len];
    // Upward: the upper tail S_n grows with n, S_{n+1} = S_n + h_n.
    let first = radial_tails(e, c0, point)?;
    let mut split = 0usize;
    if first.upper < 0.5 {
        let mut s = first.upper;
        out[0] = first;
        split = 1;
        while split < len && s < 0.5 {
            s += step.ln_step((c0 + split as u64 - 1) as f64).exp();
            if s >= 0.5 {
                break;
            }
            out[split] = Tails { lower: 1.0 - s, upper: s };
            split += 1;
        }
    }
    if split < len {
        // Downward: the lower tail F_n grows as n decreases, F_n = F_{n+1} + h_n.
        let last = radial_tails(e, c1 - 1, point)?;
        let mut f = last.lower;
        out[len - 1] = last;
        for i in (split..len - 1).rev() {
            f += step.ln_step((c0 + i as u64) as f64).exp();
            let f = f.min(1.0);
            out[i] = Tails { lower: f, upper: 1.0 - f };
        }
    }
    Ok(out)
}
