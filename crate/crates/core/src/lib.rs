//! Speckle smoothing for polarimetric SAR covariance images.
//!
//! Each pixel of a multilook PolSAR image is a 3×3 Hermitian positive
//! definite sample covariance matrix following a scaled complex Wishart law.
//! The filter in [`filter`] compares the central 3×3 block of a 5×5 window
//! with eight directional Nagao-Matsuyama regions using a Hellinger-distance
//! test ([`stats`]) and averages the regions that look statistically alike.
//!
//! ```
//! use polsmooth::filter::{filter_image, FilterConfig};
//! use polsmooth::sim::{default_sigma_a, generate_scene, SceneSpec};
//!
//! let spec = SceneSpec::homogeneous(16, 16, 4, default_sigma_a(), 7);
//! let noisy = generate_scene(&spec)?;
//! let (smoothed, report) = filter_image(&noisy, &FilterConfig::default())?;
//! assert_eq!(smoothed.height(), 16);
//! assert_eq!(report.filtered_pixels, 12 * 12);
//! # Ok::<(), polsmooth::Error>(())
//! ```
//!
//! Modules:
//!
//! - [`linalg`]: fixed-size Hermitian matrix algebra.
//! - [`wishart`]: density, ML estimate and sampler of the Wishart model.
//! - [`stats`]: Hellinger statistic, χ² survival, Šidák level.
//! - [`filter`]: the adaptive filter and the boxcar baseline.
//! - [`viz`]: Pauli and Sinclair false-colour rendering to PPM.
//! - [`sim`]: synthetic scenes and evaluation metrics.
//! - [`io`]: the `PCOV1` file format and run metadata.

// `!(x > t)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod filter;
pub mod image;
pub mod io;
pub mod linalg;
pub mod sim;
pub mod special;
pub mod stats;
pub mod viz;
pub mod wishart;

pub use error::{Error, Result};
pub use image::{CovarianceImage, Rect};
pub use linalg::{ComplexScalar, HermitianMatrix3, LowerTriangular3};
pub use stats::{TestConfig, TestDecision};
pub use wishart::{RandomStream, WishartModel};

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
