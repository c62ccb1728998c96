//! Nonparametric estimation of the stress-strength parameter `θ = P(X < Y)`
//! from paired, possibly dependent samples.
//!
//! Two estimator families are provided:
//!
//! * estimators built on the differences `z = y − x`, which estimate the
//!   survival function of `Z` at zero (empirical, Gaussian kernel, log-concave
//!   MLE and its smoothed variant);
//! * a bivariate Gaussian kernel estimator integrating the joint density over
//!   the half-plane `{x < y}`;
//!
//! plus the classical independence baseline, which convolves two marginal
//! kernel density estimates. The [`bootstrap`] module wraps any of them with
//! paired or independent resampling and four confidence-interval
//! constructions, and [`simulate`] generates bivariate sinh-arcsinh data with
//! quadrature ground truths.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod logconcave;
pub mod numerics;
pub mod sample;
pub mod simulate;

pub use bootstrap::{BootstrapResult, CiKind, ConfidenceInterval, ResamplingScheme, DEFAULT_REPLICATES};
pub use error::{Error, Result};
pub use estimators::{BandwidthOverride, EstimatorSpec, Method};
pub use kernels::{Bandwidth1D, BandwidthMatrix2D};
pub use logconcave::{LogConcaveFit, SmoothedFit};
pub use numerics::{QuadratureSpec, RngStream};
pub use sample::{DiffSample, PairedSample, Seed, ThetaEstimate};
pub use simulate::SinhArcsinhParams;
