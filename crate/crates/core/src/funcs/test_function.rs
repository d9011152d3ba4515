//! Compactly supported piecewise-constant test functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant function: `values[i]` on `[breakpoints[i], breakpoints[i+1])`,
/// zero outside `[breakpoints[0], breakpoints[m])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTestFunction", into = "RawTestFunction")]
pub struct TestFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTestFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawTestFunction> for TestFunction {
    type Error = Error;

    fn try_from(raw: RawTestFunction) -> Result<Self> {
        TestFunction::new(raw.breakpoints, raw.values)
    }
}

impl From<TestFunction> for RawTestFunction {
    fn from(f: TestFunction) -> Self {
        RawTestFunction { breakpoints: f.breakpoints, values: f.values }
    }
}

/// Closed-form integrals of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfIntegrals {
    /// ∫ f
    pub integral: f64,
    /// ∫ f(x) e^x
    pub exp_weighted: f64,
    /// ∫ f²
    pub square: f64,
    /// ∫ |f|
    pub abs: f64,
    /// ∫ |f(x)| e^x
    pub abs_exp_weighted: f64,
}

impl TestFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::invalid("test function needs at least two breakpoints"));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(format!(
                "test function has {} breakpoints but {} values (expected {})",
                breakpoints.len(),
                values.len(),
                breakpoints.len() - 1
            )));
        }
        if let Some(bad) = breakpoints.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("breakpoint {bad} is not finite")));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("value {bad} is not finite")));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "breakpoints must be strictly increasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
        Ok(TestFunction { breakpoints, values })
    }

    /// `c · 1_[lo, hi)`.
    pub fn step(lo: f64, hi: f64, c: f64) -> Result<Self> {
        TestFunction::new(vec![lo, hi], vec![c])
    }

    /// `1_[lo, hi)`.
    pub fn indicator(lo: f64, hi: f64) -> Result<Self> {
        TestFunction::step(lo, hi, 1.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(lo, hi, value)` for each piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, &v)| (w[0], w[1], v))
    }

    /// Pieces carrying a nonzero value.
    pub fn nonzero_pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.pieces().filter(|p| p.2 != 0.0)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().expect("nonempty"))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if !(x >= lo && x < hi) {
            return 0.0;
        }
        let i = self.breakpoints.partition_point(|&b| b <= x) - 1;
        self.values[i]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Right end of the last piece with a nonzero value; `None` for `f ≡ 0`.
    pub fn essential_right_endpoint(&self) -> Option<f64> {
        self.pieces().filter(|p| p.2 != 0.0).last().map(|p| p.1)
    }

    /// Left limit of `f` at its essential right endpoint.
    pub fn left_limit_at_right_endpoint(&self) -> Option<f64> {
        self.pieces().filter(|p| p.2 != 0.0).last().map(|p| p.2)
    }

    /// Left end of the first piece with a nonzero value.
    pub fn essential_left_endpoint(&self) -> Option<f64> {
        self.pieces().find(|p| p.2 != 0.0).map(|p| p.0)
    }

    pub fn scale(&self, c: f64) -> TestFunction {
        TestFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `x ↦ f(-x)`, up to the half-open convention at breakpoints.
    pub fn reflect(&self) -> TestFunction {
        TestFunction {
            breakpoints: self.breakpoints.iter().rev().map(|x| -x).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// `x ↦ f(x - shift)`.
    pub fn shift(&self, shift: f64) -> TestFunction {
        TestFunction {
            breakpoints: self.breakpoints.iter().map(|x| x + shift).collect(),
            values: self.values.clone(),
        }
    }

    /// `x ↦ f(c·x)` for `c > 0`.
    pub fn dilate(&self, c: f64) -> TestFunction {
        TestFunction {
            breakpoints: self.breakpoints.iter().map(|x| x / c).collect(),
            values: self.values.clone(),
        }
    }

    /// Nonzero jumps `(x, f(x+) - f(x-))` at the breakpoints.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        let m = self.values.len();
        (0..=m)
            .filter_map(|i| {
                let left = if i == 0 { 0.0 } else { self.values[i - 1] };
                let right = if i == m { 0.0 } else { self.values[i] };
                (left != right).then_some((self.breakpoints[i], right - left))
            })
            .collect()
    }

    fn merged_breakpoints(&self, other: &TestFunction) -> Vec<f64> {
        let mut pts: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn pointwise(&self, other: &TestFunction, op: impl Fn(f64, f64) -> f64) -> TestFunction {
        let breakpoints = self.merged_breakpoints(other);
        let values = breakpoints.windows(2).map(|w| op(self.eval(w[0]), other.eval(w[0]))).collect();
        TestFunction { breakpoints, values }
    }

    /// `a·f + b·g` on the common refinement.
    pub fn linear_combination(&self, a: f64, other: &TestFunction, b: f64) -> TestFunction {
        self.pointwise(other, |x, y| a * x + b * y)
    }

    pub fn product(&self, other: &TestFunction) -> TestFunction {
        self.pointwise(other, |x, y| x * y)
    }

    /// True when the nonzero parts of the two functions do not overlap.
    pub fn disjoint_from(&self, other: &TestFunction) -> bool {
        self.nonzero_pieces().all(|(a, b, _)| other.nonzero_pieces().all(|(c, d, _)| b <= c || d <= a))
    }

    /// Smallest common step `δ` such that every nonzero value is an integer
    /// multiple of it, if one exists.
    pub fn value_lattice(&self) -> Option<f64> {
        let nonzero: Vec<f64> = self.values.iter().copied().filter(|&v| v != 0.0).collect();
        let delta = nonzero.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !delta.is_finite() {
            return None;
        }
        let on_lattice = nonzero.iter().all(|v| {
            let k = v / delta;
            (k - k.round()).abs() <= 1e-12 * k.abs().max(1.0)
        });
        on_lattice.then_some(delta)
    }

    pub fn integrals(&self) -> TfIntegrals {
        tf_integrals(self)
    }
}

/// `∫_a^b e^x dx` evaluated as `e^a (e^{b-a} - 1)`.
pub(crate) fn exp_piece(a: f64, b: f64) -> f64 {
    a.exp() * (b - a).exp_m1()
}

/// Exact integrals `(∫f, ∫f e^x, ∫f², ∫|f|, ∫|f| e^x)`.
pub fn tf_integrals(f: &TestFunction) -> TfIntegrals {
    let mut out = TfIntegrals { integral: 0.0, exp_weighted: 0.0, square: 0.0, abs: 0.0, abs_exp_weighted: 0.0 };
    for (a, b, v) in f.pieces() {
        let len = b - a;
        let e = exp_piece(a, b);
        out.integral += v * len;
        out.exp_weighted += v * e;
        out.square += v * v * len;
        out.abs += v.abs() * len;
        out.abs_exp_weighted += v.abs() * e;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        assert!(TestFunction::new(vec![0.0], vec![]).is_err());
        assert!(TestFunction::new(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
        assert!(TestFunction::new(vec![1.0, 0.0], vec![1.0]).is_err());
        assert!(TestFunction::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(TestFunction::new(vec![0.0, 1.0], vec![f64::INFINITY]).is_err());
        assert!(TestFunction::new(vec![0.0, f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn evaluation() {
        let f = TestFunction::new(vec![-1.0, 0.0, 1.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(f.eval(-1.5), 0.0);
        assert_eq!(f.eval(-1.0), 2.0);
        assert_eq!(f.eval(-0.5), 2.0);
        assert_eq!(f.eval(0.0), -1.0);
        assert_eq!(f.eval(0.999), -1.0);
        assert_eq!(f.eval(1.0), 0.0);
    }

    #[test]
    fn integrals_of_indicator() {
        let f = TestFunction::indicator(0.0, 1.0).unwrap();
        let i = tf_integrals(&f);
        assert_eq!(i.integral, 1.0);
        assert!((i.exp_weighted - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert_eq!(i.square, 1.0);
    }

    #[test]
    fn integrals_of_zero_and_mixed() {
        let z = TestFunction::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let i = tf_integrals(&z);
        assert_eq!((i.integral, i.exp_weighted, i.square, i.abs, i.abs_exp_weighted), (0.0, 0.0, 0.0, 0.0, 0.0));
        let f = TestFunction::new(vec![-1.0, 0.0, 1.0], vec![2.0, -1.0]).unwrap();
        let i = tf_integrals(&f);
        assert_eq!(i.integral, 1.0);
        assert_eq!(i.square, 5.0);
        assert_eq!(i.abs, 3.0);
    }

    #[test]
    fn right_endpoint() {
        let f = TestFunction::new(vec![-3.0, -1.0, 0.0, 2.0], vec![1.0, 0.5, 0.0]).unwrap();
        assert_eq!(f.essential_right_endpoint(), Some(0.0));
        assert_eq!(f.left_limit_at_right_endpoint(), Some(0.5));
        assert_eq!(f.essential_left_endpoint(), Some(-3.0));
        let z = TestFunction::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        assert_eq!(z.essential_right_endpoint(), None);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f: TestFunction = serde_json::from_str(r#"{"breakpoints":[0,1,3],"values":[1,-2]}"#).unwrap();
        assert_eq!(f.values(), &[1.0, -2.0]);
        let back: TestFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        let err = serde_json::from_str::<TestFunction>(r#"{"breakpoints":[1,0],"values":[1]}"#).unwrap_err();
        assert!(err.to_string().contains("strictly increasing"));
    }

    #[test]
    fn lattice_detection() {
        assert_eq!(TestFunction::indicator(0.0, 1.0).unwrap().value_lattice(), Some(1.0));
        let f = TestFunction::new(vec![0.0, 1.0, 2.0], vec![0.5, -1.5]).unwrap();
        assert_eq!(f.value_lattice(), Some(0.5));
        let g = TestFunction::new(vec![0.0, 1.0, 2.0], vec![1.0, std::f64::consts::SQRT_2]).unwrap();
        assert_eq!(g.value_lattice(), None);
    }

    #[test]
    fn combination_and_disjointness() {
        let f = TestFunction::indicator(0.0, 1.0).unwrap();
        let g = TestFunction::indicator(2.0, 3.0).unwrap();
        assert!(f.disjoint_from(&g));
        let h = f.linear_combination(2.0, &g, -1.0);
        assert_eq!(h.eval(0.5), 2.0);
        assert_eq!(h.eval(2.5), -1.0);
        assert_eq!(h.eval(1.5), 0.0);
        assert!(!h.disjoint_from(&f));
    }
}
