//! Debug renderings of labels and intermediate maps.

use std::path::Path;

use crate::dataset_io::{save_gray8, write_rgb, LabelClass, LabelImage, RgbImage};
use crate::depth_pipeline::{AnomalyMap, DrivableMask};
use crate::error::Result;
use crate::grid::Grid;
use crate::vdisparity::{LineKind, VDisparityLine, VDisparityMap};

pub const UNKNOWN_COLOR: [u8; 3] = [0, 0, 255];
pub const DRIVABLE_COLOR: [u8; 3] = [0, 255, 0];
pub const ANOMALY_COLOR: [u8; 3] = [255, 0, 0];

pub fn class_color(class: LabelClass) -> [u8; 3] {
    match class {
        LabelClass::Unknown => UNKNOWN_COLOR,
        LabelClass::Drivable => DRIVABLE_COLOR,
        LabelClass::Anomaly => ANOMALY_COLOR,
    }
}

/// Blue / green / red rendering of a label image.
pub fn colorize_label(label: &LabelImage) -> RgbImage {
    let (w, h) = label.dims();
    Grid::from_fn(w, h, |x, y| class_color(label.class(x, y)))
}

/// `[0, 1]` map scaled to 8-bit gray.
pub fn anomaly_to_gray(map: &AnomalyMap) -> Grid<u8> {
    map.grid().map(|&v| (v * 255.0).round() as u8)
}

pub fn mask_to_gray(mask: &Grid<bool>) -> Grid<u8> {
    mask.map(|&m| if m { 255 } else { 0 })
}

fn line_color(kind: LineKind) -> [u8; 3] {
    match kind {
        LineKind::Drivable => DRIVABLE_COLOR,
        LineKind::Infinity => UNKNOWN_COLOR,
        LineKind::Anomaly => ANOMALY_COLOR,
        LineKind::Unclassified => [255, 255, 0],
    }
}

/// Log-scaled v-disparity counts (rows down, bins across) with the lines
/// drawn over their row extents.
pub fn render_v_disparity(map: &VDisparityMap, lines: &[VDisparityLine]) -> RgbImage {
    let counts = map.counts();
    let peak = counts.as_slice().iter().copied().max().unwrap_or(0) as f64;
    let scale = if peak > 0.0 { 255.0 / (1.0 + peak).ln() } else { 0.0 };
    let mut img = counts.map(|&c| {
        let g = ((1.0 + c as f64).ln() * scale).round() as u8;
        [g, g, g]
    });
    for line in lines {
        for v in line.v_min..=line.v_max.min(map.rows().saturating_sub(1)) {
            let bin = line.bin_at(v as f64 + 0.5).floor();
            if bin >= 0.0 && (bin as usize) < map.bins() {
                img.set(bin as usize, v, line_color(line.kind));
            }
        }
    }
    img
}

pub fn write_gray(grid: &Grid<u8>, path: &Path) -> Result<()> {
    save_gray8(grid, path)
}

pub fn write_label_viz(label: &LabelImage, path: &Path) -> Result<()> {
    write_rgb(&colorize_label(label), path)
}

pub fn write_drivable_mask(mask: &DrivableMask, path: &Path) -> Result<()> {
    write_gray(&mask_to_gray(mask.grid()), path)
}

pub fn write_anomaly_map(map: &AnomalyMap, path: &Path) -> Result<()> {
    write_gray(&anomaly_to_gray(map), path)
}
