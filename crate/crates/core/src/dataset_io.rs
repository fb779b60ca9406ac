//! Image types and on-disk conventions for RGB-D frames and labels.
//!
//! * RGB: 3-channel 8-bit PNG.
//! * Depth: 1-channel 16-bit PNG in millimeters, `0` meaning no return.
//! * Labels: 1-channel 8-bit PNG holding raw class indices `0`, `1`, `2`.
//! * Normalized depth: 1-channel 8-bit PNG, `0` reserved for invalid pixels.
//!
//! A dataset directory holds `rgb/`, `depth/` and `label/` subdirectories
//! whose files are paired by basename.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, GrayImage, ImageBuffer, Luma};

use crate::error::{ensure_same_size, Error, Result};
use crate::grid::Grid;

pub const RGB_DIR: &str = "rgb";
pub const DEPTH_DIR: &str = "depth";
pub const LABEL_DIR: &str = "label";

/// Default sensor range cap in meters.
pub const DEFAULT_MAX_RANGE: f32 = 10.0;

/// 8-bit sRGB pixels.
pub type RgbImage = Grid<[u8; 3]>;

/// Per-pixel distance along the optical axis in meters.
///
/// A stored value of `0.0` marks an invalid pixel; every other value lies in
/// `(0, max_range]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    depths: Grid<f32>,
    max_range: f32,
}

impl DepthImage {
    /// Builds a depth image from metric values. Non-finite, non-positive and
    /// out-of-range values become invalid.
    pub fn from_meters(mut depths: Grid<f32>, max_range: f32) -> Result<Self> {
        if !(max_range > 0.0 && max_range.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "max_range must be positive, got {max_range}"
            )));
        }
        for d in depths.as_mut_slice() {
            if !(d.is_finite() && *d > 0.0 && *d <= max_range) {
                *d = 0.0;
            }
        }
        Ok(Self { depths, max_range })
    }

    /// Converts raw millimeter readings; `0` and anything beyond `max_range`
    /// are invalid.
    pub fn from_millimeters(raw: &Grid<u16>, max_range: f32) -> Result<Self> {
        Self::from_meters(raw.map(|&mm| mm as f32 / 1000.0), max_range)
    }

    /// All-invalid image.
    pub fn invalid(width: usize, height: usize, max_range: f32) -> Result<Self> {
        Self::from_meters(Grid::new(width, height, 0.0), max_range)
    }

    pub fn width(&self) -> usize {
        self.depths.width()
    }

    pub fn height(&self) -> usize {
        self.depths.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.depths.dims()
    }

    pub fn max_range(&self) -> f32 {
        self.max_range
    }

    pub fn depths(&self) -> &Grid<f32> {
        &self.depths
    }

    #[inline]
    pub fn depth(&self, x: usize, y: usize) -> Option<f32> {
        let d = *self.depths.get(x, y);
        (d > 0.0).then_some(d)
    }

    pub fn valid_count(&self) -> usize {
        self.depths.as_slice().iter().filter(|&&d| d > 0.0).count()
    }

    /// Millimeter encoding used on disk, rounded to the nearest millimeter.
    pub fn to_millimeters(&self) -> Grid<u16> {
        self.depths
            .map(|&d| (d as f64 * 1000.0).round().clamp(0.0, u16::MAX as f64) as u16)
    }
}

/// The three label classes with their on-disk values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum LabelClass {
    Unknown = 0,
    Drivable = 1,
    Anomaly = 2,
}

impl LabelClass {
    pub const ALL: [LabelClass; 3] = [LabelClass::Unknown, LabelClass::Drivable, LabelClass::Anomaly];

    pub fn from_u8(value: u8) -> Result<Self> {
        match value {
            0 => Ok(LabelClass::Unknown),
            1 => Ok(LabelClass::Drivable),
            2 => Ok(LabelClass::Anomaly),
            other => Err(Error::InvalidLabel(other)),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            LabelClass::Unknown => "unknown",
            LabelClass::Drivable => "drivable",
            LabelClass::Anomaly => "anomaly",
        }
    }
}

/// Per-pixel class image; only values 0, 1 and 2 can occur.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelImage(Grid<u8>);

impl LabelImage {
    /// All-unknown label.
    pub fn unknown(width: usize, height: usize) -> Self {
        Self(Grid::new(width, height, LabelClass::Unknown as u8))
    }

    pub fn from_classes(grid: Grid<LabelClass>) -> Self {
        Self(grid.map(|&c| c as u8))
    }

    pub fn from_raw(grid: Grid<u8>) -> Result<Self> {
        if let Some(&bad) = grid.as_slice().iter().find(|&&v| v > 2) {
            return Err(Error::InvalidLabel(bad));
        }
        Ok(Self(grid))
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn class(&self, x: usize, y: usize) -> LabelClass {
        match *self.0.get(x, y) {
            0 => LabelClass::Unknown,
            1 => LabelClass::Drivable,
            _ => LabelClass::Anomaly,
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, class: LabelClass) {
        self.0.set(x, y, class as u8);
    }

    pub fn raw(&self) -> &Grid<u8> {
        &self.0
    }

    pub fn count(&self, class: LabelClass) -> usize {
        self.0.as_slice().iter().filter(|&&v| v == class as u8).count()
    }
}

/// Depth rescaled to 8 bits; `0` marks invalid pixels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedDepthImage(Grid<u8>);

impl NormalizedDepthImage {
    pub fn values(&self) -> &Grid<u8> {
        &self.0
    }

    pub fn into_inner(self) -> Grid<u8> {
        self.0
    }
}

/// Maps valid depths linearly from `(0, max_range]` onto `[1, 255]`
/// (rounding to nearest); invalid pixels stay `0`.
pub fn normalize_depth(depth: &DepthImage) -> NormalizedDepthImage {
    let max = depth.max_range() as f64;
    NormalizedDepthImage(depth.depths().map(|&d| {
        if d > 0.0 {
            let t = (d as f64 / max).min(1.0);
            (1.0 + t * 254.0).round().clamp(1.0, 255.0) as u8
        } else {
            0
        }
    }))
}

fn open_image(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::image(path, other),
    })
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = match open_image(path)? {
        DynamicImage::ImageRgb8(img) => img,
        DynamicImage::ImageRgba8(img) => DynamicImage::ImageRgba8(img).to_rgb8(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("expected 8-bit RGB, found {:?}", other.color()),
            })
        }
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = img.pixels().map(|p| p.0).collect();
    Grid::from_vec(w, h, data)
}

/// Reads a 16-bit millimeter depth PNG, applying the range cap.
pub fn load_depth(path: &Path, max_range: f32) -> Result<DepthImage> {
    let img = match open_image(path)? {
        DynamicImage::ImageLuma16(img) => img,
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("expected 16-bit single-channel depth, found {:?}", other.color()),
            })
        }
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let raw = Grid::from_vec(w, h, img.into_raw())?;
    DepthImage::from_millimeters(&raw, max_range)
}

/// Loads an RGB frame and its depth frame, which must share dimensions.
pub fn load_rgbd_pair(rgb_path: &Path, depth_path: &Path, max_range: f32) -> Result<(RgbImage, DepthImage)> {
    let rgb = load_rgb(rgb_path)?;
    let depth = load_depth(depth_path, max_range)?;
    ensure_same_size(rgb.dims(), depth.dims())?;
    if rgb.width() == 0 || rgb.height() == 0 {
        return Err(Error::UnsupportedFormat {
            path: rgb_path.to_path_buf(),
            detail: "empty image".into(),
        });
    }
    Ok((rgb, depth))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    Ok(())
}

pub(crate) fn save_gray8(grid: &Grid<u8>, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let img = GrayImage::from_raw(grid.width() as u32, grid.height() as u32, grid.as_slice().to_vec())
        .expect("grid buffer matches its dimensions");
    img.save(path).map_err(|e| Error::image(path, e))
}

fn load_gray8(path: &Path) -> Result<Grid<u8>> {
    let img = match open_image(path)? {
        DynamicImage::ImageLuma8(img) => img,
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                detail: format!("expected 8-bit single-channel image, found {:?}", other.color()),
            })
        }
    };
    Grid::from_vec(img.width() as usize, img.height() as usize, img.into_raw())
}

pub fn write_label(label: &LabelImage, path: &Path) -> Result<()> {
    save_gray8(label.raw(), path)
}

pub fn read_label(path: &Path) -> Result<LabelImage> {
    LabelImage::from_raw(load_gray8(path)?)
}

pub fn write_normalized_depth(depth: &NormalizedDepthImage, path: &Path) -> Result<()> {
    save_gray8(depth.values(), path)
}

pub fn read_normalized_depth(path: &Path) -> Result<NormalizedDepthImage> {
    Ok(NormalizedDepthImage(load_gray8(path)?))
}

pub fn write_depth(depth: &DepthImage, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mm = depth.to_millimeters();
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(mm.width() as u32, mm.height() as u32, mm.into_vec())
            .expect("grid buffer matches its dimensions");
    img.save(path).map_err(|e| Error::image(path, e))
}

pub fn write_rgb(rgb: &RgbImage, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let flat: Vec<u8> = rgb.as_slice().iter().flatten().copied().collect();
    let img = image::RgbImage::from_raw(rgb.width() as u32, rgb.height() as u32, flat)
        .expect("grid buffer matches its dimensions");
    img.save(path).map_err(|e| Error::image(path, e))
}

/// Sorted basenames (without extension) of the PNG files in `dir`.
pub fn png_stems(dir: &Path) -> Result<BTreeSet<String>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut stems = BTreeSet::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.insert(stem.to_string());
            }
        }
    }
    Ok(stems)
}

/// Paths of one frame inside a dataset directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramePaths {
    pub name: String,
    pub rgb: PathBuf,
    pub depth: PathBuf,
}

impl FramePaths {
    pub fn in_dataset(root: &Path, name: &str) -> Self {
        Self {
            name: name.to_string(),
            rgb: root.join(RGB_DIR).join(format!("{name}.png")),
            depth: root.join(DEPTH_DIR).join(format!("{name}.png")),
        }
    }
}
