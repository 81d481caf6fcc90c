use super::{EvalError, EvalReport};
use image::{Rgb, RgbImage};
use std::path::Path;

/// One-degree bins over `[0, 180]`; an error of exactly 180 lands in the
/// last bin.
pub const HISTOGRAM_BINS: usize = 180;

const BAR_WIDTH: u32 = 4;
const PLOT_HEIGHT: u32 = 240;
const MARGIN: u32 = 20;

pub fn error_histogram(report: &EvalReport) -> [u64; HISTOGRAM_BINS] {
    let mut bins = [0u64; HISTOGRAM_BINS];
    for s in &report.per_sample {
        let b = (s.error.max(0.0).floor() as usize).min(HISTOGRAM_BINS - 1);
        bins[b] += 1;
    }
    bins
}

/// Draws the error histogram as a bar chart. Bar heights are relative to
/// the fullest bin; grid ticks mark every 10°.
pub fn render_error_histogram(report: &EvalReport) -> Result<RgbImage, EvalError> {
    if report.per_sample.is_empty() {
        return Err(EvalError::InvalidArgument("report has no scored samples".into()));
    }
    let bins = error_histogram(report);
    let peak = *bins.iter().max().expect("non-empty") as f64;
    let width = 2 * MARGIN + BAR_WIDTH * HISTOGRAM_BINS as u32;
    let height = 2 * MARGIN + PLOT_HEIGHT;
    let mut img = RgbImage::from_pixel(width, height, Rgb([255, 255, 255]));
    let base = MARGIN + PLOT_HEIGHT;

    for tick in (0..=HISTOGRAM_BINS as u32).step_by(10) {
        let x = (MARGIN + tick * BAR_WIDTH).min(width - 1);
        let len = if tick % 90 == 0 { 10 } else { 5 };
        for y in base..(base + len).min(height) {
            img.put_pixel(x, y, Rgb([0, 0, 0]));
        }
    }
    for (i, &count) in bins.iter().enumerate() {
        let h = ((count as f64 / peak) * PLOT_HEIGHT as f64).round() as u32;
        let x0 = MARGIN + i as u32 * BAR_WIDTH;
        for x in x0..x0 + BAR_WIDTH - 1 {
            for y in base - h..base {
                img.put_pixel(x, y, Rgb([40, 90, 170]));
            }
        }
    }
    for x in MARGIN..width - MARGIN {
        img.put_pixel(x, base, Rgb([0, 0, 0]));
    }
    Ok(img)
}

/// [`render_error_histogram`] saved as PNG.
pub fn plot_error_histogram(report: &EvalReport, path: &Path) -> Result<(), EvalError> {
    render_error_histogram(report)?
        .save(path).map_err(|source| match source {
        image::ImageError::IoError(e) => EvalError::Io { path: path.to_owned(), source: e },
        other => EvalError::Image { path: path.to_owned(), source: other },
    })
}
