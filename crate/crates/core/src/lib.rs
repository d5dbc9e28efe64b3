//! Rashomon-ratio toolkit for infinite classifier families.
//!
//! Four pieces fit together here:
//!
//! - [`measures`]: seeded Monte-Carlo estimation of Rashomon ratios over any
//!   sampled classifier family, with Hoeffding and split-data concentration
//!   reports for the estimates.
//! - [`gaussian`]: closed-form Bayes, projected, and reducible errors for
//!   affine classifiers on a two-component Gaussian mixture, identified with
//!   the unit sphere, plus ratio-versus-distance sweeps.
//! - [`relu`]: the infinite-width ReLU Gram matrix of a unit-normalized
//!   dataset, its smallest eigenvalue and complexity term `y' H^-1 y`, and a
//!   theta-function lower bound on the ratio for randomly initialized
//!   two-layer ReLU networks.
//! - [`subset`]: the subset-size calculus that turns a large ratio into a
//!   small random subfamily with a loss sandwich, and the TARP classifier
//!   (thresholding after random projection) built on it.
//!
//! Everything Monte-Carlo draws from counter-based substreams keyed by
//! `(seed, draw index)`, so all results are bit-identical across runs and
//! worker counts.

pub mod dataset;
pub mod error;
pub mod gaussian;
pub mod linalg;
pub mod measures;
pub mod relu;
pub mod rng;
pub mod special;
pub mod subset;

pub use error::{Error, Result};
