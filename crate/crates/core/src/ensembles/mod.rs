//! Radial laws, kernels, truncation and exact window samplers.

pub mod cells;
pub mod ensemble;
pub mod rng;
pub mod sampler;
pub mod truncation;
pub mod variates;
pub mod window;

pub use cells::CellMasses;
pub use ensemble::{
    hyperbolic_modulus, hyperbolic_modulus_inverse, k_coeff, kernel_eval, radial_cdf, radial_tails, Ensemble,
    SquaredRadius,
};
pub use rng::ReplicateRng;
pub use sampler::{sample_window, RadialSample, SamplePoint, Strategy, WindowSampler};
pub use truncation::{tails_sweep, truncation_range, truncation_range_for_band, TruncationRange};
pub use variates::{sample_radius, sample_squared_radius};
pub use window::{Band, Coordinate, Window};
