//! Exact window-restricted sampling of the moduli process.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cells::CellMasses;
use super::ensemble::{radial_tails, Ensemble};
use super::rng::ReplicateRng;
use super::truncation::TruncationRange;
use super::variates::sample_squared_radius;
use super::window::{Coordinate, Window};
use crate::error::Result;
use crate::funcs::special::Tails;

/// How the indices of the truncation range are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Draw every `ρ_n` in the range and keep those in the window.
    Direct,
    /// Bernoulli-thin the range with the exact per-index window probabilities,
    /// then draw landed values from the conditional laws.
    Thinned,
    /// `Direct` for short ranges, `Thinned` otherwise.
    #[default]
    Auto,
}

/// Ranges up to this length are sampled directly under [`Strategy::Auto`].
pub const AUTO_DIRECT_LIMIT: u64 = 4096;
const BLOCK: usize = 256;
const INVERSION_STEPS: usize = 200;

/// One landed point: its index and its coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub n: u64,
    pub value: f64,
}

/// One draw of the moduli process restricted to a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSample {
    pub n_min: i64,
    pub n_max: i64,
    pub points: Vec<SamplePoint>,
    pub seed: u64,
    pub replicate_id: u64,
    pub truncation_mass: f64,
}

impl RadialSample {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rows `replicate_id,n,value`, without header.
    pub fn write_csv_rows<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for p in &self.points {
            writeln!(out, "{},{},{:.16e}", self.replicate_id, p.n, p.value)?;
        }
        Ok(())
    }
}

/// Sampler for a fixed (ensemble, window cells, seed), producing replicates by id.
#[derive(Debug, Clone)]
pub struct WindowSampler {
    cells: CellMasses,
    strategy: Strategy,
    seed: u64,
    /// Row-major cumulative cell masses (thinned strategy only).
    cumulative: Vec<f64>,
    block_max: Vec<f64>,
}

impl WindowSampler {
    /// Sampler over the cells `[b_k, b_{k+1})` of `boundaries`.
    pub fn new(e: &Ensemble, coordinate: Coordinate, boundaries: &[f64], eps: f64, strategy: Strategy, seed: u64) -> Result<Self> {
        let cells = CellMasses::new(e, coordinate, boundaries, eps)?;
        Ok(Self::from_cells(cells, strategy, seed))
    }

    /// Sampler over an explicit index range.
    pub fn with_range(
        e: &Ensemble,
        coordinate: Coordinate,
        boundaries: &[f64],
        range: TruncationRange,
        strategy: Strategy,
        seed: u64,
    ) -> Result<Self> {
        let cells = CellMasses::with_range(e, coordinate, boundaries, range)?;
        Ok(Self::from_cells(cells, strategy, seed))
    }

    pub fn from_cells(cells: CellMasses, strategy: Strategy, seed: u64) -> Self {
        let strategy = match strategy {
            Strategy::Auto if cells.range().len() <= AUTO_DIRECT_LIMIT => Strategy::Direct,
            Strategy::Auto => Strategy::Thinned,
            s => s,
        };
        let (cumulative, block_max) = if strategy == Strategy::Thinned {
            let k = cells.cells();
            let mut cumulative = Vec::with_capacity(cells.range().len() as usize * k);
            for (_, row) in cells.rows() {
                let mut acc = 0.0;
                for m in row {
                    acc += m;
                    cumulative.push(acc);
                }
            }
            let block_max = cumulative
                .chunks(k * BLOCK)
                .map(|block| block.chunks(k).map(|r| r[k - 1]).fold(0.0, f64::max))
                .collect();
            (cumulative, block_max)
        } else {
            (Vec::new(), Vec::new())
        };
        WindowSampler { cells, strategy, seed, cumulative, block_max }
    }

    pub fn cells(&self) -> &CellMasses {
        &self.cells
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn window(&self) -> &Window {
        self.cells.window()
    }

    /// Visit each landed point as `(n, cell, uniform position within the cell
    /// mass)`, or with the drawn coordinate in the direct strategy.
    fn visit(&self, replicate_id: u64, mut on_point: impl FnMut(u64, usize, Landing)) {
        let range = self.cells.range();
        let e = *self.cells.ensemble();
        let mut rng = ReplicateRng::new(self.seed, replicate_id);
        match self.strategy {
            Strategy::Direct | Strategy::Auto => {
                let window = *self.cells.window();
                for n in range.indices() {
                    let p = sample_squared_radius(&e, n, rng.particle(n));
                    let x = window.value_of(&e, p);
                    if let Some(k) = self.cells.locate(x) {
                        on_point(n, k, Landing::Value(x));
                    }
                }
            }
            Strategy::Thinned => {
                let k = self.cells.cells();
                let n0 = range.indices().start;
                let len = range.len() as usize;
                let mut seq = rng.sequential();
                for (b, &q) in self.block_max.iter().enumerate() {
                    if q <= 0.0 {
                        continue;
                    }
                    let start = b * BLOCK;
                    let end = (start + BLOCK).min(len);
                    let log_miss = (-q).ln_1p();
                    let mut i = start;
                    loop {
                        // Failures before the next candidate in a Bernoulli(q) sequence.
                        let u: f64 = 1.0 - seq.random::<f64>();
                        let skip = if log_miss == f64::NEG_INFINITY { 0.0 } else { (u.ln() / log_miss).floor() };
                        if skip >= (end - i) as f64 {
                            break;
                        }
                        i += skip as usize;
                        let row = &self.cumulative[i * k..(i + 1) * k];
                        let w = seq.random::<f64>() * q;
                        if w < row[k - 1] {
                            let cell = row.partition_point(|&c| c <= w);
                            let below = if cell == 0 { 0.0 } else { row[cell - 1] };
                            let mass = row[cell] - below;
                            let frac = if mass > 0.0 { ((w - below) / mass).clamp(0.0, 1.0) } else { 0.5 };
                            on_point(n0 + i as u64, cell, Landing::Fraction(frac));
                        }
                        i += 1;
                        if i >= end {
                            break;
                        }
                    }
                }
            }
        }
    }

    /// Number of points in each cell for one replicate.
    pub fn sample_counts(&self, replicate_id: u64) -> Vec<u64> {
        let mut counts = vec![0u64; self.cells.cells()];
        self.visit(replicate_id, |_, k, _| counts[k] += 1);
        counts
    }

    /// Full replicate with coordinates of every landed point.
    pub fn sample(&self, replicate_id: u64) -> Result<RadialSample> {
        let mut landed = Vec::new();
        self.visit(replicate_id, |n, k, l| landed.push((n, k, l)));
        let mut points = Vec::with_capacity(landed.len());
        for (n, k, l) in landed {
            let value = match l {
                Landing::Value(x) => x,
                Landing::Fraction(frac) => self.invert_in_cell(n, k, frac)?,
            };
            points.push(SamplePoint { n, value });
        }
        let range = self.cells.range();
        Ok(RadialSample {
            n_min: range.n_min,
            n_max: range.n_max,
            points,
            seed: self.seed,
            replicate_id,
            truncation_mass: range.mass_bound,
        })
    }

    /// Coordinate `x` in cell `k` with `P(ρ_n ∈ [b_k, x]) = frac · P(ρ_n ∈ cell k)`.
    fn invert_in_cell(&self, n: u64, k: usize, frac: f64) -> Result<f64> {
        let e = self.cells.ensemble();
        let b = self.cells.boundaries();
        let (mut lo, mut hi) = (b[k], b[k + 1]);
        let base = radial_tails(e, n, self.cells.point_at(lo))?;
        let top = radial_tails(e, n, self.cells.point_at(hi))?;
        let target = frac * Tails::mass_between(base, top);
        for _ in 0..INVERSION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let at = radial_tails(e, n, self.cells.point_at(mid))?;
            if Tails::mass_between(base, at) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, Copy)]
enum Landing {
    Value(f64),
    Fraction(f64),
}

/// One replicate of the process restricted to `w`.
pub fn sample_window(e: &Ensemble, w: &Window, seed: u64, replicate_id: u64, eps: f64) -> Result<RadialSample> {
    WindowSampler::new(e, w.coordinate, &[w.lo, w.hi], eps, Strategy::Auto, seed)?.sample(replicate_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outside_disc_is_empty() {
        let e = Ensemble::hyperbolic(1.0).unwrap();
        let s = sample_window(&e, &Window::raw(1.0, 3.0).unwrap(), 1, 0, 1e-12).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.truncation_mass, 0.0);
    }

    #[test]
    fn reproducible_per_replicate() {
        let e = Ensemble::Ginibre;
        let w = Window::scaled(0.0, 5.0, 50.0, 50.0).unwrap();
        let a = sample_window(&e, &w, 9, 4, 1e-12).unwrap();
        let b = sample_window(&e, &w, 9, 4, 1e-12).unwrap();
        let c = sample_window(&e, &w, 9, 5, 1e-12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, c.points);
        assert!(a.points.iter().all(|p| p.value >= 0.0 && p.value <= 5.0));
    }

    #[test]
    fn thinned_values_stay_in_cells() {
        let e = Ensemble::hyperbolic(2.0).unwrap();
        let coord = Coordinate::Scaled { r: 6.0, a_r: 6f64.exp() };
        let s = WindowSampler::new(&e, coord, &[0.0, 1.0, 4.0], 1e-12, Strategy::Thinned, 3).unwrap();
        let counts = s.sample_counts(11);
        let full = s.sample(11).unwrap();
        assert_eq!(counts.iter().sum::<u64>() as usize, full.len());
        let in_first = full.points.iter().filter(|p| p.value < 1.0).count() as u64;
        assert_eq!(in_first, counts[0]);
        assert!(full.points.iter().all(|p| (0.0..=4.0).contains(&p.value)));
    }
}
