use super::{DatasetError, MIN_CROP_SIDE};
use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// What to do with the canvas area the rotated image no longer covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillPolicy {
    /// Keep the input size and paint uncovered corners black.
    #[default]
    FillBlack,
    /// Return the largest centered rectangle with the input's aspect ratio
    /// that contains no fill pixels.
    CenterCrop,
}

impl FromStr for FillPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fill_black" | "fill-black" => Ok(Self::FillBlack),
            "center_crop" | "center-crop" => Ok(Self::CenterCrop),
            other => Err(format!("unknown fill policy {other:?}")),
        }
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropBox {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// Rotates `img` counter-clockwise by `angle` degrees about its center using
/// bilinear interpolation.
///
/// Multiples of 90° on square images (and of 180° on any image) are exact
/// pixel permutations.
pub fn rotate_image(img: &RgbImage, angle: f64, policy: FillPolicy) -> Result<RgbImage, DatasetError> {
    if !angle.is_finite() {
        return Err(DatasetError::NonFiniteAngle(angle));
    }
    let rotated = rotate_fill_black(img, angle);
    match policy {
        FillPolicy::FillBlack => Ok(rotated),
        FillPolicy::CenterCrop => {
            let b = center_crop_box(img.width(), img.height(), angle)?;
            Ok(image::imageops::crop_imm(&rotated, b.x, b.y, b.width, b.height).to_image())
        }
    }
}

/// The fill-free centered crop for a `width`×`height` image rotated by
/// `angle`, keeping the original aspect ratio and a one-pixel safety margin
/// on each side for interpolation.
pub fn center_crop_box(width: u32, height: u32, angle: f64) -> Result<CropBox, DatasetError> {
    if !angle.is_finite() {
        return Err(DatasetError::NonFiniteAngle(angle));
    }
    let (w, h) = (width as f64, height as f64);
    let quarter = quarter_turns(angle);
    let (width_out, height_out) = match quarter {
        Some(q) if q % 2 == 0 => (width, height),
        Some(_) if width == height => (width, height),
        _ => {
            let (s, c) = angle.to_radians().sin_cos();
            let (s, c) = (s.abs(), c.abs());
            // pixel-center extents
            let (ew, eh) = (w - 1.0, h - 1.0);
            let k = (ew / (c * ew + s * eh)).min(eh / (s * ew + c * eh)).min(1.0);
            let margin = if quarter.is_some() { 0.0 } else { 2.0 };
            let cw = ((k * ew).floor() + 1.0 - margin).max(0.0) as u32;
            let ch = ((k * eh).floor() + 1.0 - margin).max(0.0) as u32;
            (cw.min(width), ch.min(height))
        }
    };
    if width_out < MIN_CROP_SIDE || height_out < MIN_CROP_SIDE {
        return Err(DatasetError::DegenerateCrop {
            angle,
            width,
            height,
            crop_width: width_out,
            crop_height: height_out,
        });
    }
    Ok(CropBox {
        x: (width - width_out) / 2,
        y: (height - height_out) / 2,
        width: width_out,
        height: height_out,
    })
}

/// Number of counter-clockwise quarter turns if `angle` is an exact multiple
/// of 90, reduced to 0..4.
fn quarter_turns(angle: f64) -> Option<u32> {
    let r = angle.rem_euclid(360.0);
    [0.0, 90.0, 180.0, 270.0, 360.0]
        .iter()
        .position(|&q| r == q)
        .map(|i| (i % 4) as u32)
}

fn rotate_fill_black(img: &RgbImage, angle: f64) -> RgbImage {
    let (w, h) = img.dimensions();
    match quarter_turns(angle) {
        Some(0) => return img.clone(),
        Some(2) => return image::imageops::rotate180(img),
        // rotate270 is a clockwise three-quarter turn, i.e. one CCW quarter
        Some(1) if w == h => return image::imageops::rotate270(img),
        Some(3) if w == h => return image::imageops::rotate90(img),
        _ => {}
    }

    let (s, c) = angle.to_radians().sin_cos();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let max_x = w as f64 - 1.0;
    let max_y = h as f64 - 1.0;
    const EPS: f64 = 1e-6;

    let mut out = RgbImage::new(w, h);
    for (x, y, px) in out.enumerate_pixels_mut() {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        // inverse map, image coordinates with y pointing down
        let sx = cx + c * dx - s * dy;
        let sy = cy + s * dx + c * dy;
        if sx < -EPS || sy < -EPS || sx > max_x + EPS || sy > max_y + EPS {
            continue;
        }
        *px = bilinear(img, sx.clamp(0.0, max_x), sy.clamp(0.0, max_y));
    }
    out
}

/// Bilinear sample at a point inside the pixel-center grid.
pub(crate) fn bilinear(img: &RgbImage, x: f64, y: f64) -> Rgb<u8> {
    let (w, h) = img.dimensions();
    let x0 = x.floor() as u32;
    let y0 = y.floor() as u32;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let p00 = img.get_pixel(x0, y0).0;
    let p10 = img.get_pixel(x1, y0).0;
    let p01 = img.get_pixel(x0, y1).0;
    let p11 = img.get_pixel(x1, y1).0;
    let mut out = [0u8; 3];
    for ch in 0..3 {
        let top = p00[ch] as f64 * (1.0 - fx) + p10[ch] as f64 * fx;
        let bottom = p01[ch] as f64 * (1.0 - fx) + p11[ch] as f64 * fx;
        out[ch] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    Rgb(out)
}
