use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::ensemble::{Ensemble, SquaredRadius};

fn gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// Draw `ρ_n²`: `Gamma(n+1, 1)` for Ginibre, `Beta(n+1, α)` for the hyperbolic
/// ensemble (as a ratio of gammas, keeping `1 - ρ_n²` exact).
pub fn sample_squared_radius<R: Rng + ?Sized>(e: &Ensemble, n: u64, rng: &mut R) -> SquaredRadius {
    let a = n as f64 + 1.0;
    match e {
        Ensemble::Ginibre => {
            let u = gamma(a, rng);
            SquaredRadius { u, comp: 1.0 - u }
        }
        Ensemble::Hyperbolic { alpha } => {
            let g1 = gamma(a, rng);
            let g2 = gamma(*alpha, rng);
            let total = g1 + g2;
            SquaredRadius { u: g1 / total, comp: g2 / total }
        }
    }
}

/// Draw `ρ_n`.
pub fn sample_radius<R: Rng + ?Sized>(e: &Ensemble, n: u64, rng: &mut R) -> f64 {
    sample_squared_radius(e, n, rng).modulus()
}
