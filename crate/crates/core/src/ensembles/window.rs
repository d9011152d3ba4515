use serde::{Deserialize, Serialize};

use super::ensemble::{Ensemble, SquaredRadius};
use crate::error::{Error, Result};

/// Hyperbolic windows reaching this close to the unit circle are rejected.
pub const HYPERBOLIC_EDGE_GAP: f64 = 1e-15;

/// Coordinate in which a window and the sampled values are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coordinate {
    /// The modulus `|z|`.
    RawModulus,
    /// `ln((1+|z|)/(1-|z|))`; hyperbolic ensemble only.
    HyperbolicModulus,
    /// `a_R (|z| - R)` for Ginibre, `a_R (|z|_h - R)` for the hyperbolic ensemble.
    Scaled {
        #[serde(rename = "R")]
        r: f64,
        #[serde(rename = "a_R")]
        a_r: f64,
    },
}

/// Interval `[lo, hi]` in a given coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWindow", into = "RawWindow")]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub coordinate: Coordinate,
}

#[derive(Serialize, Deserialize)]
struct RawWindow {
    lo: f64,
    hi: f64,
    coordinate: Coordinate,
}

impl TryFrom<RawWindow> for Window {
    type Error = Error;

    fn try_from(raw: RawWindow) -> Result<Self> {
        Window::new(raw.lo, raw.hi, raw.coordinate)
    }
}

impl From<Window> for RawWindow {
    fn from(w: Window) -> Self {
        RawWindow { lo: w.lo, hi: w.hi, coordinate: w.coordinate }
    }
}

/// Range of squared radii covered by a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo: SquaredRadius,
    pub hi: SquaredRadius,
}

impl Window {
    pub fn new(lo: f64, hi: f64, coordinate: Coordinate) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
            return Err(Error::invalid(format!("window needs finite lo < hi, got [{lo}, {hi}]")));
        }
        if let Coordinate::Scaled { r, a_r } = coordinate {
            if !r.is_finite() || !(a_r > 0.0) || !a_r.is_finite() {
                return Err(Error::invalid(format!("scaled window needs finite R and a_R > 0, got R={r}, a_R={a_r}")));
            }
        }
        Ok(Window { lo, hi, coordinate })
    }

    pub fn raw(lo: f64, hi: f64) -> Result<Self> {
        Window::new(lo, hi, Coordinate::RawModulus)
    }

    pub fn scaled(lo: f64, hi: f64, r: f64, a_r: f64) -> Result<Self> {
        Window::new(lo, hi, Coordinate::Scaled { r, a_r })
    }

    fn check_coordinate(&self, e: &Ensemble) -> Result<()> {
        if matches!((e, self.coordinate), (Ensemble::Ginibre, Coordinate::HyperbolicModulus)) {
            return Err(Error::invalid("hyperbolic modulus coordinate requires the hyperbolic ensemble"));
        }
        Ok(())
    }

    /// Squared radius of the point with coordinate `x`, clamped at the origin.
    pub fn point_at(&self, e: &Ensemble, x: f64) -> SquaredRadius {
        let modulus = |r: f64| if r <= 0.0 { SquaredRadius::ZERO } else { SquaredRadius::from_modulus(r) };
        match (self.coordinate, e) {
            (Coordinate::RawModulus, _) => modulus(x),
            (Coordinate::HyperbolicModulus, _) => SquaredRadius::from_hyperbolic(x),
            (Coordinate::Scaled { r, a_r }, Ensemble::Ginibre) => modulus(r + x / a_r),
            (Coordinate::Scaled { r, a_r }, Ensemble::Hyperbolic { .. }) => SquaredRadius::from_hyperbolic(r + x / a_r),
        }
    }

    /// Coordinate of a point.
    pub fn value_of(&self, e: &Ensemble, p: SquaredRadius) -> f64 {
        match (self.coordinate, e) {
            (Coordinate::RawModulus, _) => p.modulus(),
            (Coordinate::HyperbolicModulus, _) => p.hyperbolic(),
            (Coordinate::Scaled { r, a_r }, Ensemble::Ginibre) => a_r * (p.modulus() - r),
            (Coordinate::Scaled { r, a_r }, Ensemble::Hyperbolic { .. }) => a_r * (p.hyperbolic() - r),
        }
    }

    /// Band of squared radii in the window, `None` when the window contains no
    /// admissible radius.
    pub fn band(&self, e: &Ensemble) -> Result<Option<Band>> {
        self.check_coordinate(e)?;
        let lo = self.point_at(e, self.lo);
        let hi = self.point_at(e, self.hi);
        if hi.u <= 0.0 {
            return Ok(None);
        }
        if let Ensemble::Hyperbolic { .. } = e {
            if lo.comp <= 0.0 {
                return Ok(None);
            }
            // 1 - r = (1 - r²) / (1 + r)
            let gap = if hi.comp <= 0.0 { 0.0 } else { hi.comp / (1.0 + hi.modulus()) };
            if gap < HYPERBOLIC_EDGE_GAP {
                return Err(Error::invalid(format!(
                    "hyperbolic window reaches the unit circle (1 - r_hi = {gap:e}); it holds infinitely many points"
                )));
            }
        }
        Ok(Some(Band { lo, hi }))
    }
}
