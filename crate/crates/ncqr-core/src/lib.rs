//! Two-stage non-crossing Bayesian quantile regression.
//!
//! Stage one fits independent Bayesian quantile regressions, one per target
//! quantile level, using the asymmetric Laplace distribution (ALD) as the
//! working likelihood and a Gibbs sampler over its exponential-normal mixture
//! representation. Because the levels are fitted separately, the resulting
//! quantile curves may cross.
//!
//! Stage two removes the crossing. Every fitted ALD model has a closed-form
//! quantile function, so each auxiliary model at level `p` induces posterior
//! draws of the quantile at any other level `tau`. Pooling the induced
//! posterior means across source levels with a zero-mean Gaussian process over
//! the level index (squared-exponential kernel) yields adjusted estimates that
//! borrow strength from nearby levels. The kernel bandwidth is the single free
//! parameter: the smallest bandwidth whose adjusted surface is monotone in
//! `tau` at every evaluation point is selected by a verified bracketing
//! search.
//!
//! ```
//! use ncqr_core::{
//!     basis::{build_design, BasisSpec},
//!     gp_adjust::{search_min_bandwidth, AdjustmentMode, GpConfig},
//!     induced::StageOneStats,
//!     sampler::{fit_all_levels, SamplerConfig},
//!     QuantileLevelGrid,
//! };
//!
//! let x: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
//! let y: Vec<f64> = x
//!     .iter()
//!     .enumerate()
//!     .map(|(i, v)| 1.0 + 2.0 * v + 0.3 * (i as f64 * 2.7).sin())
//!     .collect();
//! let design = build_design(&x, 1, &BasisSpec::linear()).unwrap();
//! let grid = QuantileLevelGrid::new(vec![0.25, 0.5, 0.75]).unwrap();
//! let cfg = SamplerConfig {
//!     total_iterations: 300,
//!     burn_in: 100,
//!     thin: 2,
//!     ..SamplerConfig::default()
//! };
//! let fits = fit_all_levels(&design, &y, &grid, &cfg).unwrap();
//! let stats = StageOneStats::build(&fits, design.values()).unwrap();
//! let template = GpConfig::new(1.0, AdjustmentMode::Gpr);
//! let (b, surface) = search_min_bandwidth(&stats, &template).unwrap();
//! assert!(b > 0.0);
//! assert!(surface.detect_crossing(1e-10).is_empty());
//! ```
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature enables standard-library math, and `parallel` adds rayon-based
//! evaluation of independent level fits.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ald;
pub mod basis;
pub mod error;
pub(crate) mod fmath;
pub mod gp_adjust;
pub mod induced;
pub(crate) mod linalg;
pub mod sampler;
pub mod simulate;
mod stream;

pub use error::Error;
pub use induced::QuantileLevelGrid;
pub use stream::derive_seed;

pub type Result<T> = core::result::Result<T, Error>;
