//! Non-learned orientation baselines: Hough-variance, Hough-power and
//! Fourier-spectrum estimation.
//!
//! All three look for straight structure, so they only recover the applied
//! rotation modulo 90°: horizontal and vertical line families are scored
//! together, and a half-turn is invisible to them. They are meant for the
//! restricted ±30°/±45° levels and refuse the full-circle level.
//!
//! These are reconstructions of the named scoring rules (rho-profile
//! variance, rho-profile power, dominant spectral direction), not
//! transcriptions of a reference implementation.
//!
//! Angle convention matches [`crate::dataset`]: the returned value is the
//! estimated counter-clockwise rotation applied to an upright image. A
//! horizontal line rotated by `a` has its normal at `90 - a` in image
//! coordinates (y down), and its vertical partner at `-a`.

mod edges;
mod fourier;
mod hough;

pub use edges::{edge_map, grayscale, sobel_magnitude, EdgeMap};
pub use fourier::{estimate_fourier, fourier_orientation, FourierEstimate, LOW_CONFIDENCE_RATIO};
pub use hough::{estimate_hough_pow, estimate_hough_var, hough_accumulator, HoughAccumulator};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Upper bound on candidate angles, to keep pathological configs bounded.
const MAX_CANDIDATES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error("no usable structure in the image")]
    NoStructure,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid estimator config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassicalMethod {
    #[serde(rename = "hough-var")]
    HoughVar,
    #[serde(rename = "hough-pow")]
    HoughPow,
    #[serde(rename = "fourier")]
    Fourier,
}

impl ClassicalMethod {
    pub const ALL: [ClassicalMethod; 3] = [Self::HoughVar, Self::HoughPow, Self::Fourier];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::HoughVar => "hough-var",
            Self::HoughPow => "hough-pow",
            Self::Fourier => "fourier",
        }
    }

    pub fn estimate(self, img: &image::RgbImage, cfg: &EstimatorConfig) -> Result<f64, EstimateError> {
        match self {
            Self::HoughVar => estimate_hough_var(img, cfg),
            Self::HoughPow => estimate_hough_pow(img, cfg),
            Self::Fourier => estimate_fourier(img, cfg),
        }
    }
}

impl fmt::Display for ClassicalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassicalMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hough-var" => Ok(Self::HoughVar),
            "hough-pow" => Ok(Self::HoughPow),
            "fourier" => Ok(Self::Fourier),
            other => Err(format!("unknown classical method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Candidate rotations, signed degrees, inclusive.
    pub search_range: (f64, f64),
    pub angle_step: f64,
    /// Quantile of gradient magnitudes above which a pixel is an edge.
    pub edge_threshold: f64,
    pub num_rho_bins: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self { search_range: (-45.0, 45.0), angle_step: 0.5, edge_threshold: 0.9, num_rho_bins: 256 }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<(), EstimateError> {
        let bad = |m: String| Err(EstimateError::InvalidConfig(m));
        let (lo, hi) = self.search_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("search range ({lo}, {hi}) must be finite with lo < hi"));
        }
        if hi - lo > 90.0 {
            return bad(format!("search range spans {}°; line estimators are ambiguous beyond 90°", hi - lo));
        }
        if !(self.angle_step.is_finite() && self.angle_step > 0.0) {
            return bad(format!("angle step {} must be positive", self.angle_step));
        }
        if (hi - lo) / self.angle_step > MAX_CANDIDATES as f64 {
            return bad(format!("angle step {} yields too many candidates", self.angle_step));
        }
        if !(0.0..1.0).contains(&self.edge_threshold) {
            return bad(format!("edge threshold {} must be in [0, 1)", self.edge_threshold));
        }
        if !(2..=65_536).contains(&self.num_rho_bins) {
            return bad(format!("num_rho_bins {} must be in 2..=65536", self.num_rho_bins));
        }
        Ok(())
    }

    /// Candidate rotations `lo, lo + step, ...` up to `hi`.
    pub fn candidates(&self) -> Vec<f64> {
        let (lo, hi) = self.search_range;
        let n = ((hi - lo) / self.angle_step + 1e-9).floor() as usize;
        (0..=n).map(|k| lo + k as f64 * self.angle_step).collect()
    }
}

/// Index of the best score, refined by fitting a parabola through it and its
/// neighbours. Returns the refined candidate angle.
fn refine_peak(candidates: &[f64], scores: &[f64], step: f64) -> f64 {
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |b, (i, &s)| if s > scores[b] { i } else { b });
    if best == 0 || best + 1 == scores.len() {
        return candidates[best];
    }
    let (l, c, r) = (scores[best - 1], scores[best], scores[best + 1]);
    let denom = l - 2.0 * c + r;
    if denom >= 0.0 {
        return candidates[best];
    }
    let offset = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
    candidates[best] + offset * step
}

/// Maps `a` into `[lo, lo + 90)` modulo 90.
pub fn fold_into_range(a: f64, lo: f64) -> f64 {
    lo + (a - lo).rem_euclid(90.0)
}
