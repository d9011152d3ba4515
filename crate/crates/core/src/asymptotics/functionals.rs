//! Limit variances of the fixed-scale linear statistics.
//!
//! Both functionals have the form `∫∫ [f(x) - f(y)]² K(x, y) dx dy` with a
//! translation-structured kernel, so for piecewise-constant `f` they reduce to
//! pairwise cell interactions: closed form for the Gaussian kernel, a 1-D
//! quadrature per pair for the logistic-beta kernel.

use super::constants::LogisticBeta;
use crate::error::Result;
use crate::funcs::quad::{quad_1d, CompensatedSum, QuadratureSpec};
use crate::funcs::special::erfc;
use crate::funcs::test_function::TestFunction;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Cells of `f` padded with the two unbounded zero cells on either side.
fn padded_cells(f: &TestFunction) -> Vec<(f64, f64, f64)> {
    let (lo, hi) = f.support();
    let mut cells = vec![(f64::NEG_INFINITY, lo, 0.0)];
    cells.extend(f.pieces());
    cells.push((hi, f64::INFINITY, 0.0));
    cells
}

/// `∫_t^∞ ∫_s^∞ e^{-u²} du ds = (e^{-t²} - √π t erfc t) / 2`.
fn gauss_double_tail(t: f64) -> f64 {
    if t == f64::INFINITY {
        return 0.0;
    }
    0.5 * ((-t * t).exp() - SQRT_PI * t * erfc(t))
}

/// `∫_a^b ∫_c^d e^{-(x-y)²} dy dx` for `d <= a`.
fn gauss_cell_pair(left: (f64, f64), right: (f64, f64)) -> f64 {
    let (c, d) = left;
    let (a, b) = right;
    let l = |t: f64| if t.is_nan() { 0.0 } else { gauss_double_tail(t) };
    (l(a - d) - l(b - d)) - (l(a - c) - l(b - c))
}

/// `(1/√π) ∫∫ [f(x) - f(y)]² e^{-(x-y)²} dx dy`, the Ginibre fixed-scale limit variance.
pub fn limit_variance_ginibre(f: &TestFunction) -> f64 {
    let cells = padded_cells(f);
    let mut total = CompensatedSum::new();
    for (j, &(a, b, vj)) in cells.iter().enumerate() {
        for &(c, d, vi) in &cells[..j] {
            let dv = vi - vj;
            if dv != 0.0 {
                total.add(dv * dv * gauss_cell_pair((c, d), (a, b)));
            }
        }
    }
    2.0 * total.value() / SQRT_PI
}

/// `(1/B(α, α+1)) ∫∫ [f(x) - f(y)]² e^{(α+1)(x+y)} / (e^x + e^y)^{2α+1} dx dy`,
/// the hyperbolic fixed-scale limit variance.
pub fn limit_variance_hyperbolic(alpha: f64, f: &TestFunction, spec: &QuadratureSpec) -> Result<f64> {
    let k = LogisticBeta::new(alpha)?;
    let cells = padded_cells(f);
    let pairs = cells.len() * (cells.len() - 1) / 2;
    let share = QuadratureSpec::new(spec.abs_tol / pairs as f64, spec.rel_tol, spec.max_subdivisions)?;
    let mut total = CompensatedSum::new();
    for (j, &(a, b, vj)) in cells.iter().enumerate() {
        for &(c, d, vi) in &cells[..j] {
            let dv = vi - vj;
            if dv == 0.0 {
                continue;
            }
            // The normalised kernel is e^x times the gap density, so the inner
            // integral over one cell is a gap probability; integrate over the
            // bounded cell of the pair.
            let w = if a.is_finite() && b.is_finite() {
                quad_1d(|x: f64| x.exp() * k.mass(c - x, d - x), a, b, &share)?.value
            } else {
                quad_1d(|y: f64| y.exp() * k.mass(a - y, b - y), c, d, &share)?.value
            };
            total.add(dv * dv * w);
        }
    }
    Ok(2.0 * total.value())
}
