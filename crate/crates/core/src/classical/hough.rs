use super::edges::{edge_map, EdgeMap};
use super::{refine_peak, EstimateError, EstimatorConfig};
use image::RgbImage;

/// Line-parameter vote counts.
///
/// Row `i` holds the rho profile for normal angle `theta_axis[i]`; rho is
/// measured from the image center. For `k` candidate rotations the theta
/// axis has `2k` rows: first the normals of the horizontal family
/// (`90 - a`), then those of the vertical family (`-a`).
#[derive(Debug, Clone, PartialEq)]
pub struct HoughAccumulator {
    /// Row-major `theta_axis.len() × rho_axis.len()`.
    pub bins: Vec<u32>,
    pub theta_axis: Vec<f64>,
    /// Bin centers in pixels.
    pub rho_axis: Vec<f64>,
    /// Largest |rho| the image itself can reach, per theta row.
    pub support: Vec<f64>,
}

impl HoughAccumulator {
    pub fn row(&self, theta_index: usize) -> &[u32] {
        let n = self.rho_axis.len();
        &self.bins[theta_index * n..(theta_index + 1) * n]
    }

    pub fn total_votes(&self) -> u64 {
        self.bins.iter().map(|&c| c as u64).sum()
    }
}

/// Votes every edge pixel into every theta row.
pub fn hough_accumulator(edges: &EdgeMap, candidates: &[f64], num_rho_bins: usize) -> HoughAccumulator {
    let cx = (edges.width as f64 - 1.0) / 2.0;
    let cy = (edges.height as f64 - 1.0) / 2.0;
    let r_max = (cx * cx + cy * cy).sqrt().max(1.0);
    let bin_width = 2.0 * r_max / num_rho_bins as f64;
    let rho_axis: Vec<f64> = (0..num_rho_bins).map(|i| -r_max + (i as f64 + 0.5) * bin_width).collect();

    let theta_axis: Vec<f64> = candidates
        .iter()
        .map(|a| 90.0 - a)
        .chain(candidates.iter().map(|a| -a))
        .collect();

    let mut bins = vec![0u32; theta_axis.len() * num_rho_bins];
    let mut support = Vec::with_capacity(theta_axis.len());
    for (row, &theta) in theta_axis.iter().enumerate() {
        let (s, c) = theta.to_radians().sin_cos();
        support.push(cx * c.abs() + cy * s.abs());
        let out = &mut bins[row * num_rho_bins..(row + 1) * num_rho_bins];
        for &(x, y) in &edges.points {
            let rho = (x as f64 - cx) * c + (y as f64 - cy) * s;
            let b = (((rho + r_max) / bin_width) as usize).min(num_rho_bins - 1);
            out[b] += 1;
        }
    }
    HoughAccumulator { bins, theta_axis, rho_axis, support }
}

fn power(acc: &HoughAccumulator, row: usize) -> f64 {
    acc.row(row).iter().map(|&c| (c as f64) * (c as f64)).sum()
}

/// Variance of the rho profile over the bins the image can actually reach
/// at this theta.
fn variance(acc: &HoughAccumulator, row: usize) -> f64 {
    let reach = acc.support[row];
    let counts: Vec<f64> = acc
        .row(row)
        .iter()
        .zip(&acc.rho_axis)
        .filter(|(_, r)| r.abs() <= reach)
        .map(|(&c, _)| c as f64)
        .collect();
    if counts.is_empty() {
        return 0.0;
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n
}

fn estimate_with(img: &RgbImage, cfg: &EstimatorConfig, score: fn(&HoughAccumulator, usize) -> f64) -> Result<f64, EstimateError> {
    cfg.validate()?;
    let edges = edge_map(img, cfg.edge_threshold)?;
    let candidates = cfg.candidates();
    let acc = hough_accumulator(&edges, &candidates, cfg.num_rho_bins);
    let k = candidates.len();
    let scores: Vec<f64> = (0..k).map(|i| score(&acc, i) + score(&acc, k + i)).collect();
    Ok(refine_peak(&candidates, &scores, cfg.angle_step))
}

/// Rotation whose line families give the most sharply peaked rho profiles,
/// scored by profile variance.
pub fn estimate_hough_var(img: &RgbImage, cfg: &EstimatorConfig) -> Result<f64, EstimateError> {
    estimate_with(img, cfg, variance)
}

/// As [`estimate_hough_var`], scored by the sum of squared counts.
pub fn estimate_hough_pow(img: &RgbImage, cfg: &EstimatorConfig) -> Result<f64, EstimateError> {
    estimate_with(img, cfg, power)
}
