//! Orientation estimation for arbitrarily rotated images.
//!
//! - [`angle`]: circular angle arithmetic, the circular loss and its
//!   subgradient.
//! - [`dataset`]: synthetic upright corpora, rotation, split manifests and
//!   model preprocessing.
//! - [`classical`]: Hough and Fourier line-orientation baselines.
//! - [`regressor`]: the learned CNN regressor, its training loop and
//!   checkpoints.
//! - [`evaluation`]: circular MAE reports, comparison tables, ablations and
//!   error histograms.

pub mod angle;
pub mod classical;
pub mod dataset;
pub mod evaluation;
pub mod regressor;

pub use angle::{Angle, AngleError, AngularError, SignedDelta};
