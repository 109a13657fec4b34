//! Initial probability measures: spectral densities, samplers and the
//! mixing bookkeeping.

pub mod covariance;
pub mod density;
pub mod measure;
pub mod mixing;
pub mod sampler;

pub use covariance::{CovarianceKind, SpectralCovariance};
pub use density::{build_spectral_density, g2_functional, scaled_density, DensityParams};
pub use measure::{MeasureKind, MeasureParams, MeasureSpec, PointwiseMap};
pub use mixing::MixingProfile;
pub use sampler::{apply_pointwise_map, counterexample_ensemble, sample_gaussian, GaussianSampler, Sampler};
