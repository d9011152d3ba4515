//! Per-index probabilities of landing in each cell of a partitioned window.

use rayon::prelude::*;

use super::ensemble::{Ensemble, SquaredRadius};
use super::truncation::{tails_sweep, truncation_range_for_band, TruncationRange};
use super::window::{Band, Coordinate, Window};
use crate::error::{Error, Result};
use crate::funcs::special::Tails;

/// Cells `[b_k, b_{k+1})` of a window (in the window's coordinate) and, for
/// every index of the certified truncation range, the probability that `ρ_n`
/// falls in each cell.
#[derive(Debug, Clone)]
pub struct CellMasses {
    ensemble: Ensemble,
    window: Window,
    boundaries: Vec<f64>,
    range: TruncationRange,
    /// Row-major `[index][cell]`.
    masses: Vec<f64>,
}

impl CellMasses {
    /// Cell masses over the certified range for `eps`.
    pub fn new(e: &Ensemble, coordinate: Coordinate, boundaries: &[f64], eps: f64) -> Result<Self> {
        let window = Self::window_for(coordinate, boundaries)?;
        let range = truncation_range_for_band(e, window.band(e)?, eps)?;
        Self::with_range(e, coordinate, boundaries, range)
    }

    /// Cell masses over an explicit index range.
    pub fn with_range(e: &Ensemble, coordinate: Coordinate, boundaries: &[f64], range: TruncationRange) -> Result<Self> {
        let window = Self::window_for(coordinate, boundaries)?;
        window.band(e)?;
        let cells = boundaries.len() - 1;
        let indices = range.indices();
        let tails: Vec<Vec<Tails>> = boundaries
            .par_iter()
            .map(|&b| tails_sweep(e, window.point_at(e, b), indices.start, indices.end))
            .collect::<Result<_>>()?;
        let len = range.len() as usize;
        let mut masses = vec![0.0; len * cells];
        for (i, row) in masses.chunks_mut(cells.max(1)).enumerate().take(len) {
            for (k, m) in row.iter_mut().enumerate() {
                *m = Tails::mass_between(tails[k][i], tails[k + 1][i]);
            }
        }
        Ok(CellMasses { ensemble: *e, window, boundaries: boundaries.to_vec(), range, masses })
    }

    fn window_for(coordinate: Coordinate, boundaries: &[f64]) -> Result<Window> {
        if boundaries.len() < 2 {
            return Err(Error::invalid("cells need at least two boundaries"));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("cell boundaries must be strictly increasing"));
        }
        Window::new(boundaries[0], *boundaries.last().expect("nonempty"), coordinate)
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn cells(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn range(&self) -> TruncationRange {
        self.range
    }

    pub fn band(&self) -> Option<Band> {
        self.window.band(&self.ensemble).ok().flatten()
    }

    /// Masses of index `range.n_min + i`, one per cell.
    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.cells();
        &self.masses[i * k..(i + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, &[f64])> + '_ {
        self.range.indices().zip(self.masses.chunks(self.cells()))
    }

    /// Index of the cell containing `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let b = &self.boundaries;
        if !(x >= b[0] && x < b[b.len() - 1]) {
            return None;
        }
        Some(b.partition_point(|&t| t <= x) - 1)
    }

    /// Squared radius at coordinate `x`.
    pub fn point_at(&self, x: f64) -> SquaredRadius {
        self.window.point_at(&self.ensemble, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::radial_tails;

    #[test]
    fn masses_match_direct_differences() {
        let e = Ensemble::hyperbolic(1.0).unwrap();
        let coord = Coordinate::Scaled { r: 6.0, a_r: 1.0 };
        let cm = CellMasses::new(&e, coord, &[-1.0, 0.0, 0.5], 1e-12).unwrap();
        assert!(cm.range().mass_bound <= 1e-12);
        for (n, row) in cm.rows().step_by(101) {
            let p = |x: f64| radial_tails(&e, n, cm.point_at(x)).unwrap();
            let m0 = Tails::mass_between(p(-1.0), p(0.0));
            let m1 = Tails::mass_between(p(0.0), p(0.5));
            assert!((row[0] - m0).abs() < 1e-13 && (row[1] - m1).abs() < 1e-13, "n = {n}");
        }
        assert_eq!(cm.locate(-1.0), Some(0));
        assert_eq!(cm.locate(0.0), Some(1));
        assert_eq!(cm.locate(0.5), None);
    }
}
