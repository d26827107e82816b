//! Anisotropic fractional Brownian fields.
//!
//! Synthesis of fractional Brownian paths (exact) and planar anisotropic
//! fields (spectral representation), axis Radon projections, and estimation
//! of directional regularity indices from generalized quadratic variations,
//! together with the asymptotic theory of those estimators and a Monte Carlo
//! evaluation harness.
//!
//! Sampled-data types are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which every reported result uses.

pub mod error;
pub mod estimator;
pub mod filters;
pub mod harness;
pub mod io;
pub mod projection;
mod quad;
pub mod scalar;
pub mod spectral;
pub mod synthesis;
pub mod theory;

pub use error::{Error, Result};
pub use estimator::{
    estimate_direction, estimate_h, estimate_pair, estimate_projection, quad_variation, EstimateResult, PairEstimate,
};
pub use filters::infer_order;
pub use projection::{project_axis, project_window, Direction};
pub use scalar::Real;
pub use spectral::{radon_density, AnisotropicIndex, SpectralModel, Window};
pub use synthesis::{afb_sra, fbm_path, fgn_exact, Seed};

pub type DiscreteFilter = filters::DiscreteFilter<f64>;
pub type SampledPath = synthesis::SampledPath<f64>;
pub type GridField2D = synthesis::GridField2D<f64>;
pub type ProjectionResult = projection::ProjectionResult<f64>;
pub type VariationSpec = estimator::VariationSpec<f64>;
pub type FgnGenerator = synthesis::FgnGenerator<f64>;
pub type FbmGenerator = synthesis::FbmGenerator<f64>;
pub type SraSynthesizer = synthesis::SraSynthesizer<f64>;
