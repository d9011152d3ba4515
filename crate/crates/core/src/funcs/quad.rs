//! Adaptive Gauss–Kronrod quadrature in one and two dimensions.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-10, max_subdivisions: 4000 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec { abs_tol, rel_tol, max_subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::invalid(format!(
                "quadrature tolerances must be positive, got abs {} rel {}",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn scaled(&self, factor: f64) -> Self {
        QuadratureSpec { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sum of a sequence with compensation, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(centre);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = g(centre - dx);
        let f2 = g(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    res_asc *= h;
    res_abs *= h;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value: res_k * half, error: err }
}

fn adaptive<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    let first = kronrod(g, a, b);
    let mut heap = BinaryHeap::new();
    let mut total_value = first.value;
    let mut total_error = first.error;
    heap.push(first);
    let mut subdivisions = 1;
    loop {
        if !total_value.is_finite() || !total_error.is_finite() {
            return Err(Error::Quadrature { value: total_value, error: total_error, subdivisions });
        }
        if total_error <= spec.abs_tol.max(spec.rel_tol * total_value.abs()) {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Quadrature { value: total_value, error: total_error, subdivisions });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating point resolution; nothing left to refine.
            return Err(Error::Quadrature { value: total_value, error: total_error, subdivisions });
        }
        let left = kronrod(g, worst.a, mid);
        let right = kronrod(g, mid, worst.b);
        subdivisions += 1;
        heap.push(left);
        heap.push(right);
        // Recompute from scratch to avoid drift in the running totals.
        let mut v = CompensatedSum::new();
        let mut e = CompensatedSum::new();
        for s in heap.iter() {
            v.add(s.value);
            e.add(s.error);
        }
        total_value = v.value();
        total_error = e.value();
    }
    Ok(QuadResult { value: total_value, error: total_error })
}

/// Integrate `g` over `[lo, hi]`. Either endpoint may be infinite, in which
/// case the half-line is mapped to `[0, 1)` with `x = lo + u/(1-u)`.
pub fn quad_1d<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    quad_1d_dyn(&g, lo, hi, spec)
}

fn quad_1d_dyn(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::invalid("quadrature bounds must not be NaN"));
    }
    if lo == hi {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    if lo > hi {
        return quad_1d_dyn(g, hi, lo, spec).map(|r| QuadResult { value: -r.value, error: r.error });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(&|x| g(x), lo, hi, spec),
        (true, false) => {
            let h = |u: f64| {
                let v = 1.0 - u;
                g(lo + u / v) / (v * v)
            };
            adaptive(&h, 0.0, 1.0, spec)
        }
        (false, true) => {
            let h = |u: f64| {
                let v = 1.0 - u;
                g(hi - u / v) / (v * v)
            };
            adaptive(&h, 0.0, 1.0, spec)
        }
        (false, false) => {
            let half = spec.scaled(0.5);
            let a = quad_1d_dyn(g, f64::NEG_INFINITY, 0.0, &half)?;
            let b = quad_1d_dyn(g, 0.0, f64::INFINITY, &half)?;
            Ok(QuadResult { value: a.value + b.value, error: a.error + b.error })
        }
    }
}

/// Integrate over consecutive pieces `[p_0, p_1], [p_1, p_2], ...` so that
/// known kinks or jumps land on segment boundaries.
pub fn quad_1d_pieces<F: Fn(f64) -> f64>(g: F, points: &[f64], spec: &QuadratureSpec) -> Result<QuadResult> {
    if points.len() < 2 {
        return Ok(QuadResult { value: 0.0, error: 0.0 });
    }
    let pieces = (points.len() - 1) as f64;
    let share = spec.scaled(1.0 / pieces);
    let mut v = CompensatedSum::new();
    let mut e = 0.0;
    for w in points.windows(2) {
        let r = quad_1d(&g, w[0], w[1], &share)?;
        v.add(r.value);
        e += r.error;
    }
    Ok(QuadResult { value: v.value(), error: e })
}

/// Axis-aligned integration box; bounds may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2 {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Box2 {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Box2 { x, y }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Box2 { x: (lo, hi), y: (lo, hi) }
    }
}

/// Iterated integration of `g(x, y)` over a box, with optional interior
/// breakpoints along each axis.
pub fn quad_2d_pieces<F: Fn(f64, f64) -> f64>(
    g: F,
    x_points: &[f64],
    y_points: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let inner_spec = spec.scaled(0.1);
    let inner_failure: Cell<Option<Error>> = Cell::new(None);
    let worst_inner = Cell::new(0.0_f64);
    let outer = quad_1d_pieces(
        |x| match quad_1d_pieces(|y| g(x, y), y_points, &inner_spec) {
            Ok(r) => {
                worst_inner.set(worst_inner.get().max(r.error));
                r.value
            }
            Err(err) => {
                let best = match &err {
                    Error::Quadrature { value, .. } => *value,
                    _ => f64::NAN,
                };
                inner_failure.set(Some(err));
                best
            }
        },
        x_points,
        spec,
    );
    if let Some(err) = inner_failure.take() {
        return Err(err);
    }
    let outer = outer?;
    let x_span = x_points.last().copied().unwrap_or(0.0) - x_points.first().copied().unwrap_or(0.0);
    let inner_budget = if x_span.is_finite() { worst_inner.get() * x_span } else { worst_inner.get() };
    Ok(QuadResult { value: outer.value, error: outer.error + inner_budget })
}

/// Iterated integration of `g(x, y)` over `bx`.
pub fn quad_2d<F: Fn(f64, f64) -> f64>(g: F, bx: Box2, spec: &QuadratureSpec) -> Result<QuadResult> {
    quad_2d_pieces(g, &[bx.x.0, bx.x.1], &[bx.y.0, bx.y.1], spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn unit_interval() {
        let r = quad_1d(|_| 1.0, 0.0, 1.0, &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn half_lines() {
        let r = quad_1d(|t: f64| (-t).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
        // Γ(2)/4²
        let r = quad_1d(|t: f64| t * (-4.0 * t).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((r.value - 1.0 / 16.0).abs() < 1e-12);
        let r = quad_1d(|t: f64| (-t * t).exp(), f64::NEG_INFINITY, f64::INFINITY, &spec()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let r = quad_1d(|x| x, 1.0, 0.0, &spec()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn polynomials_are_exact() {
        for deg in 0..=6 {
            let r = quad_1d(|x: f64| x.powi(deg), -1.0, 2.0, &spec()).unwrap();
            let exact = (2.0f64.powi(deg + 1) - (-1.0f64).powi(deg + 1)) / (deg as f64 + 1.0);
            assert!((r.value - exact).abs() < 1e-12, "degree {deg}");
        }
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let tight = QuadratureSpec::new(1e-300, 1e-300, 1).unwrap();
        match quad_1d(|x: f64| x.sqrt(), 0.0, 1.0, &tight) {
            Err(Error::Quadrature { value, .. }) => assert!((value - 2.0 / 3.0).abs() < 1e-3),
            other => panic!("expected quadrature failure, got {other:?}"),
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(QuadratureSpec::new(0.0, 1e-10, 10).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-10, 0).is_err());
    }

    #[test]
    fn two_dimensional() {
        let r = quad_2d(|_, _| 1.0, Box2::square(0.0, 1.0), &spec()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13);
        let r = quad_2d(
            |x: f64, y: f64| (-(x * x + y * y)).exp(),
            Box2::square(f64::NEG_INFINITY, f64::INFINITY),
            &QuadratureSpec::new(1e-11, 1e-10, 4000).unwrap(),
        )
        .unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn jump_integrand_with_pieces() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 2.0 };
        let r = quad_1d_pieces(step, &[0.0, 0.3, 1.0], &spec()).unwrap();
        assert!((r.value - 1.7).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }
}
