//! Color-contrast anomaly map.
//!
//! Each pixel's Lab color is compared with a wide Gaussian average of its
//! surroundings; the squared Lab distance is the raw anomaly score `R_o`.
//! The blur scale is tied to the image size, `sigma = min(h, w) / sigma_s`,
//! and the kernel spans `3 sigma` rounded up to the next odd size. `R_o` is
//! then restricted to the drivable region (mask plus enclosed holes) and
//! normalized to give `R_f`.

mod blur;
mod lab;

pub use blur::{gaussian_blur, gaussian_kernel, kernel_size, reflect};
pub use lab::{rgb_to_lab, srgb_to_lab};

use serde::{Deserialize, Serialize};

use crate::depth_pipeline::{find_holes, AnomalyMap, DrivableMask};
use crate::error::{ensure_same_size, Error, Result};
use crate::grid::Grid;

/// Planar CIELAB image: channels `[L, a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabImage {
    pub channels: [Grid<f64>; 3],
}

impl LabImage {
    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        [0, 1, 2].map(|c| *self.channels[c].get(x, y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RgbAnomalyConfig {
    /// Divisor of `min(h, w)` giving the blur sigma.
    pub sigma_s: f64,
    /// Weight of the color map in the fused anomaly map.
    pub alpha: f64,
    /// Anomaly threshold on the fused map.
    pub kappa: f64,
}

impl Default for RgbAnomalyConfig {
    fn default() -> Self {
        Self {
            sigma_s: 12.0,
            alpha: 0.5,
            kappa: 0.3,
        }
    }
}

impl RgbAnomalyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_s > 0.0 && self.sigma_s.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma_s must be positive, got {}", self.sigma_s)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::InvalidParameter(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        Ok(())
    }

    /// Blur standard deviation for an image of the given size.
    pub fn blur_sigma(&self, height: usize, width: usize) -> f64 {
        height.min(width) as f64 / self.sigma_s
    }
}

/// Raw (unnormalized) contrast map `|L - G(L)|^2` summed over channels.
pub fn rgb_anomaly_map(lab: &LabImage, cfg: &RgbAnomalyConfig) -> Result<Grid<f32>> {
    cfg.validate()?;
    let (w, h) = lab.dims();
    let sigma = cfg.blur_sigma(h, w);
    let size = kernel_size(sigma);
    let mut out = Grid::new(w, h, 0.0f64);
    for channel in &lab.channels {
        // centring on one pixel makes constant channels blur to exact zeros
        let offset = channel.as_slice().first().copied().unwrap_or(0.0);
        let centred = channel.map(|&v| v - offset);
        let blurred = gaussian_blur(&centred, sigma, size);
        for ((o, &c), &b) in out
            .as_mut_slice()
            .iter_mut()
            .zip(centred.as_slice())
            .zip(blurred.as_slice())
        {
            let d = c - b;
            *o += d * d;
        }
    }
    Ok(out.map(|&v| v as f32))
}

/// Zeroes `r_o` outside the drivable mask and its holes, then normalizes.
pub fn finalize_rgb_anomalies(r_o: &Grid<f32>, mask: &DrivableMask) -> Result<AnomalyMap> {
    ensure_same_size(r_o.dims(), mask.dims())?;
    restrict_to_region(r_o, mask, &find_holes(mask))
}

/// As [`finalize_rgb_anomalies`] with the holes of `mask` already known.
pub(crate) fn restrict_to_region(r_o: &Grid<f32>, mask: &DrivableMask, holes: &Grid<bool>) -> Result<AnomalyMap> {
    ensure_same_size(r_o.dims(), mask.dims())?;
    ensure_same_size(r_o.dims(), holes.dims())?;
    let (w, h) = r_o.dims();
    let kept = Grid::from_fn(w, h, |x, y| {
        if mask.is_drivable(x, y) || *holes.get(x, y) {
            *r_o.get(x, y)
        } else {
            0.0
        }
    });
    Ok(AnomalyMap::normalized(kept))
}
