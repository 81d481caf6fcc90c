use super::{DatasetError, SourceImage};
use image::RgbImage;
use std::fs;
use std::path::{Path, PathBuf};

/// Reads PNG or JPEG as 8-bit RGB.
pub fn load_rgb(path: &Path) -> Result<RgbImage, DatasetError> {
    let img = image::open(path).map_err(|source| DatasetError::Image { path: path.to_path_buf(), source })?;
    Ok(img.to_rgb8())
}

/// Writes 8-bit RGB; the format follows the file extension.
pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<(), DatasetError> {
    img.save(path).map_err(|source| DatasetError::Image { path: path.to_path_buf(), source })
}

/// One id per line; surrounding whitespace, blank lines and `#` comments are
/// ignored.
pub fn parse_discard_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

pub fn read_discard_list(path: &Path) -> Result<Vec<String>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_discard_list(&text))
}

pub fn write_discard_list(ids: &[String], path: &Path) -> Result<(), DatasetError> {
    let mut text = ids.join("\n");
    text.push('\n');
    fs::write(path, text).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })
}

/// Result of reading a directory of upright images.
#[derive(Debug, Default)]
pub struct Ingested {
    pub images: Vec<SourceImage>,
    /// Files that decoded but were below the minimum size.
    pub rejected: Vec<PathBuf>,
}

/// Loads every `.png`, `.jpg` and `.jpeg` file directly inside `dir`, in
/// file-name order. The id is the file stem.
pub fn ingest_directory(dir: &Path) -> Result<Ingested, DatasetError> {
    let io_err = |source| DatasetError::Io { path: dir.to_path_buf(), source };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "jpg" | "jpeg"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();

    let mut out = Ingested::default();
    for path in paths {
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        match SourceImage::new(id, load_rgb(&path)?) {
            Ok(img) => out.images.push(img),
            Err(DatasetError::TooSmall { .. }) => out.rejected.push(path),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
