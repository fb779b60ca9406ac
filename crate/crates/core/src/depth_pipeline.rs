//! Back-projection of classified v-disparity lines into the image: the
//! drivable mask, the binary depth anomaly map, enclosed holes in the
//! drivable mask, and the hole-augmented final depth anomaly map.

use std::collections::VecDeque;

use crate::error::{ensure_same_size, Result};
use crate::grid::Grid;
use crate::vdisparity::VDisparityLine;

/// Pixels on the dominant ground plane. Only pixels with a valid depth can
/// be set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DrivableMask(Grid<bool>);

impl DrivableMask {
    pub fn new(mask: Grid<bool>) -> Self {
        Self(mask)
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self(Grid::new(width, height, false))
    }

    pub fn grid(&self) -> &Grid<bool> {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn is_drivable(&self, x: usize, y: usize) -> bool {
        *self.0.get(x, y)
    }

    pub fn count(&self) -> usize {
        self.0.as_slice().iter().filter(|&&m| m).count()
    }
}

/// Per-pixel anomaly confidence in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnomalyMap(Grid<f32>);

impl AnomalyMap {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self(Grid::new(width, height, 0.0))
    }

    /// Wraps values, clamping them into `[0, 1]`; NaN becomes 0.
    pub fn from_grid(mut values: Grid<f32>) -> Self {
        for v in values.as_mut_slice() {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
        Self(values)
    }

    /// Divides by the maximum when it is positive; all-zero maps stay zero.
    pub fn normalized(mut values: Grid<f32>) -> Self {
        let max = values.as_slice().iter().copied().fold(0.0f32, f32::max);
        if max > 0.0 {
            for v in values.as_mut_slice() {
                *v = (*v / max).max(0.0);
            }
        }
        Self::from_grid(values)
    }

    pub fn grid(&self) -> &Grid<f32> {
        &self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn value(&self, x: usize, y: usize) -> f32 {
        *self.0.get(x, y)
    }

    pub fn max(&self) -> f32 {
        self.0.as_slice().iter().copied().fold(0.0, f32::max)
    }
}

#[inline]
fn near_line(line: &VDisparityLine, v: usize, disparity: f32, tol: f64) -> bool {
    line.contains_row(v) && (disparity as f64 / line.bin_width - line.bin_at(v as f64)).abs() <= tol
}

/// Pixels whose disparity lies within `tol` bins of the drivable line at
/// their row, inside the line's row extent.
pub fn extract_drivable_mask(disparities: &Grid<f32>, drivable: &VDisparityLine, tol: f64) -> DrivableMask {
    let (w, h) = disparities.dims();
    DrivableMask(Grid::from_fn(w, h, |x, y| {
        let d = *disparities.get(x, y);
        d > 0.0 && near_line(drivable, y, d, tol)
    }))
}

/// Binary map of pixels within `tol` bins of any anomaly line. Pixels
/// already claimed by `drivable` are left out, so the two never overlap.
pub fn extract_depth_anomalies(
    disparities: &Grid<f32>,
    anomaly_lines: &[VDisparityLine],
    drivable: &DrivableMask,
    tol: f64,
) -> Result<AnomalyMap> {
    ensure_same_size(disparities.dims(), drivable.dims())?;
    let (w, h) = disparities.dims();
    Ok(AnomalyMap(Grid::from_fn(w, h, |x, y| {
        let d = *disparities.get(x, y);
        let hit = d > 0.0 && !drivable.is_drivable(x, y) && anomaly_lines.iter().any(|l| near_line(l, y, d, tol));
        if hit {
            1.0
        } else {
            0.0
        }
    })))
}

/// Non-drivable pixels in 4-connected components that do not reach the
/// image border, i.e. regions enclosed by the drivable mask.
pub fn find_holes(mask: &DrivableMask) -> Grid<bool> {
    let (w, h) = mask.dims();
    let mut outside = Grid::new(w, h, false);
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, outside: &mut Grid<bool>, queue: &mut VecDeque<(usize, usize)>| {
        if !mask.is_drivable(x, y) && !*outside.get(x, y) {
            outside.set(x, y, true);
            queue.push_back((x, y));
        }
    };
    for x in 0..w {
        seed(x, 0, &mut outside, &mut queue);
        seed(x, h - 1, &mut outside, &mut queue);
    }
    for y in 0..h {
        seed(0, y, &mut outside, &mut queue);
        seed(w - 1, y, &mut outside, &mut queue);
    }
    while let Some((x, y)) = queue.pop_front() {
        if x > 0 {
            seed(x - 1, y, &mut outside, &mut queue);
        }
        if x + 1 < w {
            seed(x + 1, y, &mut outside, &mut queue);
        }
        if y > 0 {
            seed(x, y - 1, &mut outside, &mut queue);
        }
        if y + 1 < h {
            seed(x, y + 1, &mut outside, &mut queue);
        }
    }
    Grid::from_fn(w, h, |x, y| !mask.is_drivable(x, y) && !*outside.get(x, y))
}

/// `max(d_o, hole)` per pixel, normalized to `[0, 1]`.
pub fn finalize_depth_anomalies(d_o: &AnomalyMap, holes: &Grid<bool>) -> Result<AnomalyMap> {
    let fused = d_o
        .grid()
        .zip_map(holes, |&d, &hole| if hole { d.max(1.0) } else { d })?;
    Ok(AnomalyMap::normalized(fused))
}
