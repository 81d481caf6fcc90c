//! Rotation datasets built from an upright image corpus.
//!
//! Convention used throughout the crate: a positive angle is a
//! counter-clockwise rotation, and a sample's label is the rotation that was
//! applied to the upright source. Correcting an image therefore rotates it by
//! the negated label.

mod io;
mod level;
mod manifest;
mod preprocess;
mod rotate;
mod synth;

pub use io::{
    ingest_directory, load_rgb, parse_discard_list, read_discard_list, save_rgb,
    write_discard_list, Ingested,
};
pub use level::{sample_angle, DifficultyLevel};
pub use manifest::{
    build_split, entry_rng, ManifestEntry, ManifestHeader, Split, SplitCounts, SplitManifest,
};
pub use preprocess::{preprocess_for_model, resize_bilinear, MID_GRAY};
pub use rotate::{center_crop_box, rotate_image, CropBox, FillPolicy};
pub use synth::{synthesize_oriented_corpus, synthesize_with_size, SynthKind, DEFAULT_SYNTH_SIZE};

use crate::angle::{wrap_degrees, Angle};
use image::RgbImage;
use std::collections::HashMap;
use std::path::PathBuf;

/// Smallest accepted source image side.
pub const MIN_SOURCE_SIDE: u32 = 64;
/// Smallest side a center crop may shrink to.
pub const MIN_CROP_SIDE: u32 = 16;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("image {id} is {width}x{height}; both sides must be at least {MIN_SOURCE_SIDE}")]
    TooSmall { id: String, width: u32, height: u32 },
    #[error("rotation angle must be finite, got {0}")]
    NonFiniteAngle(f64),
    #[error("center crop for {angle}° on {width}x{height} degenerates to {crop_width}x{crop_height}")]
    DegenerateCrop {
        angle: f64,
        width: u32,
        height: u32,
        crop_width: u32,
        crop_height: u32,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("unknown source id {0}")]
    UnknownSource(String),
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// An upright image from the source corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceImage {
    pub id: String,
    pub pixels: RgbImage,
    pub assumed_upright: bool,
}

impl SourceImage {
    pub fn new(id: impl Into<String>, pixels: RgbImage) -> Result<Self, DatasetError> {
        let id = id.into();
        let (width, height) = pixels.dimensions();
        if width < MIN_SOURCE_SIDE || height < MIN_SOURCE_SIDE {
            return Err(DatasetError::TooSmall { id, width, height });
        }
        Ok(Self { id, pixels, assumed_upright: true })
    }
}

/// A source image after an applied rotation, with its label.
#[derive(Debug, Clone)]
pub struct RotatedSample {
    pub source_id: String,
    pub image: RgbImage,
    /// The applied rotation, wrapped.
    pub true_angle: Angle,
    /// The applied rotation in the level's native range.
    pub signed_angle: f64,
    pub level: DifficultyLevel,
}

impl RotatedSample {
    pub fn new(
        source_id: impl Into<String>,
        image: RgbImage,
        signed_angle: f64,
        level: DifficultyLevel,
    ) -> Result<Self, DatasetError> {
        if !level.contains(signed_angle) {
            return Err(DatasetError::InvalidArgument(format!(
                "angle {signed_angle} outside the {level} range"
            )));
        }
        let true_angle =
            wrap_degrees(signed_angle).map_err(|_| DatasetError::NonFiniteAngle(signed_angle))?;
        Ok(Self { source_id: source_id.into(), image, true_angle, signed_angle, level })
    }
}

/// Rotates each source listed in `split` by its manifest angle.
pub fn materialize(
    manifest: &SplitManifest,
    split: Split,
    corpus: &[SourceImage],
    policy: FillPolicy,
) -> Result<Vec<RotatedSample>, DatasetError> {
    let by_id: HashMap<&str, &SourceImage> = corpus.iter().map(|s| (s.id.as_str(), s)).collect();
    manifest
        .entries
        .iter()
        .filter(|e| e.split == split)
        .map(|e| {
            let src = by_id
                .get(e.source_id.as_str())
                .ok_or_else(|| DatasetError::UnknownSource(e.source_id.clone()))?;
            let image = rotate_image(&src.pixels, e.signed_angle, policy)?;
            RotatedSample::new(&e.source_id, image, e.signed_angle, e.level)
        })
        .collect()
}
