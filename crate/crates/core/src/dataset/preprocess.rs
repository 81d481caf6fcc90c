use image::RgbImage;
use ndarray::Array3;

/// 8-bit level that normalizes to exactly 0.
pub const MID_GRAY: u8 = 128;

/// Resizes with bilinear interpolation, aligning pixel centers. Same-size
/// input is returned unchanged.
pub fn resize_bilinear(img: &RgbImage, width: u32, height: u32) -> RgbImage {
    if img.dimensions() == (width, height) {
        return img.clone();
    }
    let (sw, sh) = img.dimensions();
    let scale_x = sw as f64 / width as f64;
    let scale_y = sh as f64 / height as f64;
    RgbImage::from_fn(width, height, |x, y| {
        let sx = ((x as f64 + 0.5) * scale_x - 0.5).clamp(0.0, sw as f64 - 1.0);
        let sy = ((y as f64 + 0.5) * scale_y - 0.5).clamp(0.0, sh as f64 - 1.0);
        super::rotate::bilinear(img, sx, sy)
    })
}

/// Resizes to `(height, width)` and maps each channel value `v` to
/// `(v - 128) / 128`, which lies in `[-1, 1)`. Output layout is
/// channel-major: shape `(3, height, width)`.
pub fn preprocess_for_model(img: &RgbImage, target: (u32, u32)) -> Array3<f32> {
    let (h, w) = target;
    let resized = resize_bilinear(img, w, h);
    let mut out = Array3::<f32>::zeros((3, h as usize, w as usize));
    for (x, y, p) in resized.enumerate_pixels() {
        for c in 0..3 {
            out[[c, y as usize, x as usize]] = (p.0[c] as f32 - MID_GRAY as f32) / 128.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn downscale_stays_in_range() {
        let img = RgbImage::from_fn(512, 512, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, 255]));
        let t = preprocess_for_model(&img, (299, 299));
        assert_eq!(t.shape(), &[3, 299, 299]);
        assert!(t.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn mid_gray_is_zero() {
        let img = RgbImage::from_pixel(80, 64, Rgb([MID_GRAY; 3]));
        let t = preprocess_for_model(&img, (32, 32));
        assert!(t.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_resize_keeps_values() {
        let img = RgbImage::from_fn(299, 299, |x, y| Rgb([(x % 256) as u8, (y % 256) as u8, ((x * y) % 256) as u8]));
        let t = preprocess_for_model(&img, (299, 299));
        for (x, y, p) in img.enumerate_pixels() {
            for c in 0..3 {
                let expect = (p.0[c] as f32 - 128.0) / 128.0;
                assert!((t[[c, y as usize, x as usize]] - expect).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn halving_averages_pairs() {
        let img = RgbImage::from_fn(64, 64, |x, _| Rgb([if x % 2 == 0 { 100 } else { 200 }; 3]));
        let small = resize_bilinear(&img, 32, 32);
        assert!(small.pixels().all(|p| p.0 == [150; 3]));
    }
}
