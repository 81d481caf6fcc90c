use super::EstimateError;
use image::RgbImage;

/// Gradient magnitudes below this are treated as flat regardless of the
/// quantile, so uniform images have no edges.
const MIN_EDGE_MAGNITUDE: f32 = 1.0;

/// Rec. 601 luma, row-major.
pub fn grayscale(img: &RgbImage) -> Vec<f32> {
    img.pixels()
        .map(|p| 0.299 * p.0[0] as f32 + 0.587 * p.0[1] as f32 + 0.114 * p.0[2] as f32)
        .collect()
}

/// Sobel gradient magnitude with clamped borders.
pub fn sobel_magnitude(gray: &[f32], width: usize, height: usize) -> Vec<f32> {
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, width as isize - 1) as usize;
        let y = y.clamp(0, height as isize - 1) as usize;
        gray[y * width + x]
    };
    let mut out = vec![0.0; width * height];
    for y in 0..height as isize {
        for x in 0..width as isize {
            let gx = at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x - 1, y)
                - at(x - 1, y + 1);
            let gy = at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)
                - at(x - 1, y - 1)
                - 2.0 * at(x, y - 1)
                - at(x + 1, y - 1);
            out[y as usize * width + x as usize] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Pixel coordinates of edge pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub width: usize,
    pub height: usize,
    pub points: Vec<(usize, usize)>,
}

/// Pixels whose gradient magnitude exceeds the `quantile` of all
/// magnitudes.
pub fn edge_map(img: &RgbImage, quantile: f64) -> Result<EdgeMap, EstimateError> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w < 3 || h < 3 {
        return Err(EstimateError::InvalidArgument(format!("image {w}x{h} is too small for edge detection")));
    }
    let mag = sobel_magnitude(&grayscale(img), w, h);
    let mut sorted = mag.clone();
    sorted.sort_by(f32::total_cmp);
    let idx = ((sorted.len() - 1) as f64 * quantile).floor() as usize;
    let threshold = sorted[idx].max(MIN_EDGE_MAGNITUDE);
    let points = mag
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > threshold)
        .map(|(i, _)| (i % w, i / w))
        .collect::<Vec<_>>();
    if points.is_empty() {
        return Err(EstimateError::NoStructure);
    }
    Ok(EdgeMap { width: w, height: h, points })
}
