//! Data tooling for traffic light detection under adverse weather.
//!
//! * [`spectral`]: Fourier domain adaptation (low-frequency amplitude swap).
//! * [`weather`]: parametric fog and rain synthesis.
//! * [`dataset`]: label files, taxonomies, manifests, augmentation,
//!   yellow-class rebalancing and splitting.
//! * [`metrics`]: IoU matching, precision/recall, AP50 and AP50-95.
//! * [`pseudo`]: pseudo-label filtering and mixed-label manifests.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the file-level pipeline uses.

pub mod dataset;
pub mod error;
pub mod metrics;
pub mod pseudo;
pub mod raster;
pub mod resample;
pub mod scalar;
pub mod seed;
pub mod spectral;
pub mod weather;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Image = raster::RasterImage<f64>;
pub type Channel = raster::Grid<f64>;
pub type Spectrum = spectral::ChannelSpectrum<f64>;
pub type Polar = spectral::AmplitudePhase<f64>;
pub type BBox = metrics::BBox<f64>;
pub type Detection = metrics::DetectionRecord<f64>;
pub type GroundTruth = metrics::GroundTruthRecord<f64>;
pub type Report = metrics::MetricsReport<f64>;

/// Toolkit version written into reproducibility records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
