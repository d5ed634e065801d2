//! Bottom-up visual saliency and its inversion.
//!
//! The crate computes an Itti-style saliency map for still images and
//! provides several attention-retargeting methods that modify an image so
//! that its computed saliency moves toward a desired distribution:
//!
//! - [`iterative`]: black-box and feedback-guided optimization of
//!   per-segment intensity, saturation and sharpness, plus per-pixel
//!   color pushes toward a region of interest.
//! - [`steerable`]: texture de-emphasis by scaling steerable-pyramid
//!   coefficients with their own texture conspicuity.
//! - [`roi`]: region-of-interest methods: center-surround inversion,
//!   orientation and hue rotation driven by symmetric KL divergence,
//!   and patch-graph color transfer.
//!
//! All rasters are stored as `f64` planes with samples in `[0, 1]`.

pub mod error;
pub mod imaging;
pub mod iterative;
pub mod metrics;
pub mod roi;
pub mod saliency;
pub mod steerable;
pub mod synth;

pub use error::{Error, Result};
pub use imaging::{Grid, Image, Layout, RoiMask};
pub use saliency::{compute_saliency, EngineConfig, FeatureSet, SaliencyMap};
