//! Depth to v-disparity: camera geometry, the row-wise disparity histogram,
//! ridge filtering, line extraction and line classification.
//!
//! Conventions: image rows `v` grow downward, `V = v - v0`. World `Y` points
//! down (a horizontal ground plane is `Y = m` with `m > 0` the camera
//! height), `Z` points forward horizontally, and the camera is pitched down
//! by `theta` about the `X` axis. A world point maps to camera depth
//! `Y sin(theta) + Z cos(theta)` and disparity `f * b / depth`.
//!
//! In the v-disparity map, column coordinates are continuous "bin
//! coordinates" `disparity / bin_width`; cell `k` is centred at `k + 0.5`.

mod classify;
mod filter;
mod hough;

pub use classify::{classify_lines, min_rows_for_height, FALLBACK_MIN_ROWS};
pub use filter::{filter_v_disparity, FilteredVDisparityMap, ORIENTATIONS_DEG};
pub use hough::{extract_lines, HoughParams};

use serde::{Deserialize, Serialize};

use crate::dataset_io::DepthImage;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Stereo pinhole camera: focal length `f` (px), baseline `b` (m), pitch
/// `theta` (rad, positive looking down) and principal point `(u0, v0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub f: f64,
    pub baseline: f64,
    pub pitch: f64,
    pub u0: f64,
    pub v0: f64,
}

impl CameraModel {
    pub fn new(f: f64, baseline: f64, pitch: f64, u0: f64, v0: f64) -> Result<Self> {
        let cam = Self {
            f,
            baseline,
            pitch,
            u0,
            v0,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f > 0.0 && self.f.is_finite()) {
            return Err(Error::InvalidParameter(format!("focal length must be positive, got {}", self.f)));
        }
        if !(self.baseline > 0.0 && self.baseline.is_finite()) {
            return Err(Error::InvalidParameter(format!("baseline must be positive, got {}", self.baseline)));
        }
        if !(self.pitch.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!("pitch must lie in (-pi/2, pi/2), got {}", self.pitch)));
        }
        if !(self.u0.is_finite() && self.v0.is_finite()) {
            return Err(Error::InvalidParameter("principal point must be finite".into()));
        }
        Ok(())
    }

    /// `f * b`, the disparity of a point at unit depth.
    #[inline]
    pub fn fb(&self) -> f64 {
        self.f * self.baseline
    }

    /// Depth along the optical axis of world point `(X, Y, Z)`.
    #[inline]
    pub fn camera_depth(&self, y: f64, z: f64) -> f64 {
        y * self.pitch.sin() + z * self.pitch.cos()
    }

    /// Projects a world point to `(U, V, disparity)`, with `U` and `V`
    /// relative to the principal point. `None` behind the camera.
    pub fn project(&self, x: f64, y: f64, z: f64) -> Option<(f64, f64, f64)> {
        let (s, c) = self.pitch.sin_cos();
        let depth = y * s + z * c;
        if depth <= 0.0 {
            return None;
        }
        let u = self.f * x / depth;
        let v = self.f * (y * c - z * s) / depth;
        Some((u, v, self.fb() / depth))
    }

    /// World `(Y, Z)` of the point seen at relative row `V` with camera depth
    /// `depth`.
    pub fn world_from_row_depth(&self, big_v: f64, depth: f64) -> (f64, f64) {
        let (s, c) = self.pitch.sin_cos();
        let y_cam = big_v * depth / self.f;
        (y_cam * c + depth * s, -y_cam * s + depth * c)
    }
}

/// Per-pixel disparity `f * b / depth`; invalid depth yields `0`.
pub fn depth_to_disparity(depth: &DepthImage, cam: &CameraModel) -> Grid<f32> {
    let fb = cam.fb();
    depth.depths().map(|&d| if d > 0.0 { (fb / d as f64) as f32 } else { 0.0 })
}

/// Row-indexed disparity histogram. Width is the bin count, height the
/// image row count.
#[derive(Clone, Debug, PartialEq)]
pub struct VDisparityMap {
    counts: Grid<u32>,
    bin_width: f64,
}

impl VDisparityMap {
    pub fn rows(&self) -> usize {
        self.counts.height()
    }

    pub fn bins(&self) -> usize {
        self.counts.width()
    }

    /// Disparity units per bin.
    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn counts(&self) -> &Grid<u32> {
        &self.counts
    }

    #[inline]
    pub fn count(&self, row: usize, bin: usize) -> u32 {
        *self.counts.get(bin, row)
    }

    pub fn total(&self) -> u64 {
        self.counts.as_slice().iter().map(|&c| c as u64).sum()
    }

    pub fn row_total(&self, row: usize) -> u64 {
        self.counts.row(row).iter().map(|&c| c as u64).sum()
    }
}

/// Accumulates the v-disparity histogram.
///
/// Bins span `[0, max_disparity]`. When `max_disparity` is `None` the span
/// ends at the largest observed disparity, so every valid pixel is counted.
/// With an explicit span, pixels beyond it are left out.
pub fn build_v_disparity(disparities: &Grid<f32>, bins: usize, max_disparity: Option<f64>) -> Result<VDisparityMap> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 disparity bins, got {bins}")));
    }
    let span = match max_disparity {
        Some(m) if m > 0.0 && m.is_finite() => m,
        Some(m) => return Err(Error::InvalidParameter(format!("max disparity must be positive, got {m}"))),
        None => {
            let observed = disparities.as_slice().iter().copied().fold(0.0f32, f32::max) as f64;
            if observed > 0.0 {
                observed
            } else {
                1.0
            }
        }
    };
    let bin_width = span / bins as f64;
    let mut counts = Grid::new(bins, disparities.height(), 0u32);
    for v in 0..disparities.height() {
        let out = counts.row_mut(v);
        for &d in disparities.row(v) {
            if d <= 0.0 {
                continue;
            }
            let d = d as f64;
            if d > span {
                continue;
            }
            let k = ((d / bin_width) as usize).min(bins - 1);
            out[k] += 1;
        }
    }
    Ok(VDisparityMap { counts, bin_width })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LineKind {
    Unclassified,
    Drivable,
    Infinity,
    Anomaly,
}

/// Straight segment in the v-disparity map, `bin(v) = intercept + slope * v`
/// in continuous bin coordinates, valid over rows `v_min..=v_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VDisparityLine {
    pub intercept: f64,
    /// Bins per row.
    pub slope: f64,
    pub v_min: usize,
    pub v_max: usize,
    /// Accumulated filter response of the supporting cells.
    pub support: f64,
    pub bin_width: f64,
    pub kind: LineKind,
}

impl VDisparityLine {
    #[inline]
    pub fn bin_at(&self, v: f64) -> f64 {
        self.intercept + self.slope * v
    }

    #[inline]
    pub fn disparity_at(&self, v: f64) -> f64 {
        self.bin_at(v) * self.bin_width
    }

    #[inline]
    pub fn contains_row(&self, v: usize) -> bool {
        (self.v_min..=self.v_max).contains(&v)
    }

    pub fn row_extent(&self) -> usize {
        self.v_max - self.v_min + 1
    }

    /// Mean disparity over the row extent.
    pub fn mean_disparity(&self) -> f64 {
        self.disparity_at((self.v_min + self.v_max) as f64 / 2.0)
    }

    /// Line re-expressed as `disparity = slope * V + intercept` with
    /// `V = v - v0`; returns `(slope, intercept)`.
    pub fn in_disparity_units(&self, v0: f64) -> (f64, f64) {
        let slope = self.slope * self.bin_width;
        (slope, self.disparity_at(v0))
    }
}
