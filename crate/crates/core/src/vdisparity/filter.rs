//! Ridge enhancement of the v-disparity map with a steerable
//! second-derivative-of-Gaussian filter.
//!
//! The second derivative along direction `(cos p, sin p)` steers exactly
//! from three basis responses: `c^2 Ixx + 2 c s Ixy + s^2 Iyy`. A bright
//! ridge has a strongly negative second derivative across it, so the ridge
//! response at each orientation is the clamped negative of that value, and
//! the output keeps the best orientation per cell.

use crate::error::{Error, Result};
use crate::grid::Grid;

use super::VDisparityMap;

/// Orientation set for max-pooling, in degrees.
pub const ORIENTATIONS_DEG: [f64; 6] = [0.0, 30.0, 60.0, 90.0, 120.0, 150.0];

/// Filter output on the same grid as the source map. The raw counts ride
/// along because line fitting weights cells by them.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredVDisparityMap {
    responses: Grid<f32>,
    counts: Grid<u32>,
    bin_width: f64,
    sigma: f64,
}

impl FilteredVDisparityMap {
    pub fn responses(&self) -> &Grid<f32> {
        &self.responses
    }

    pub fn counts(&self) -> &Grid<u32> {
        &self.counts
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rows(&self) -> usize {
        self.responses.height()
    }

    pub fn bins(&self) -> usize {
        self.responses.width()
    }

    #[inline]
    pub fn response(&self, row: usize, bin: usize) -> f32 {
        *self.responses.get(bin, row)
    }

    pub fn max_response(&self) -> f32 {
        self.responses.as_slice().iter().copied().fold(0.0, f32::max)
    }
}

/// Sampled `G`, `G'` and `G''` on `[-r, r]` with `r = ceil(4 sigma)`.
pub(crate) fn gaussian_derivative_kernels(sigma: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let radius = (4.0 * sigma).ceil() as i64;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let s2 = sigma * sigma;
    let mut g = Vec::new();
    let mut g1 = Vec::new();
    let mut g2 = Vec::new();
    for i in -radius..=radius {
        let x = i as f64;
        let value = norm * (-x * x / (2.0 * s2)).exp();
        g.push(value);
        g1.push(-x / s2 * value);
        g2.push((x * x / (s2 * s2) - 1.0 / s2) * value);
    }
    (g, g1, g2)
}

/// Zero-padded convolution along x then along y.
fn convolve_separable(src: &Grid<f64>, kx: &[f64], ky: &[f64]) -> Grid<f64> {
    let (w, h) = src.dims();
    let rx = (kx.len() / 2) as i64;
    let ry = (ky.len() / 2) as i64;
    let mut tmp = Grid::new(w, h, 0.0f64);
    for y in 0..h {
        let row = src.row(y);
        let out = tmp.row_mut(y);
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &k) in kx.iter().enumerate() {
                let sx = x as i64 - (j as i64 - rx);
                if sx >= 0 && (sx as usize) < w {
                    acc += row[sx as usize] * k;
                }
            }
            *o = acc;
        }
    }
    let mut out = Grid::new(w, h, 0.0f64);
    for y in 0..h {
        for (j, &k) in ky.iter().enumerate() {
            let sy = y as i64 - (j as i64 - ry);
            if sy < 0 || sy as usize >= h {
                continue;
            }
            let src_row = tmp.row(sy as usize);
            for (o, &s) in out.row_mut(y).iter_mut().zip(src_row) {
                *o += s * k;
            }
        }
    }
    out
}

/// Max-pooled, non-negative steerable ridge response of the map.
pub fn filter_v_disparity(map: &VDisparityMap, sigma_f: f64) -> Result<FilteredVDisparityMap> {
    if !(sigma_f > 0.0 && sigma_f.is_finite()) {
        return Err(Error::InvalidParameter(format!("filter sigma must be positive, got {sigma_f}")));
    }
    let src = map.counts().map(|&c| c as f64);
    let (g, g1, g2) = gaussian_derivative_kernels(sigma_f);
    let ixx = convolve_separable(&src, &g2, &g);
    let iyy = convolve_separable(&src, &g, &g2);
    let ixy = convolve_separable(&src, &g1, &g1);

    let steer: Vec<(f64, f64, f64)> = ORIENTATIONS_DEG
        .iter()
        .map(|deg| {
            let (s, c) = deg.to_radians().sin_cos();
            (c * c, 2.0 * c * s, s * s)
        })
        .collect();
    // sigma^2 keeps responses comparable across filter scales
    let scale = sigma_f * sigma_f;
    let responses = Grid::from_fn(src.width(), src.height(), |x, y| {
        let (xx, xy, yy) = (*ixx.get(x, y), *ixy.get(x, y), *iyy.get(x, y));
        let best = steer
            .iter()
            .map(|&(a, b, c)| -(a * xx + b * xy + c * yy))
            .fold(0.0f64, f64::max);
        (best * scale) as f32
    });
    Ok(FilteredVDisparityMap {
        responses,
        counts: map.counts().clone(),
        bin_width: map.bin_width(),
        sigma: sigma_f,
    })
}
