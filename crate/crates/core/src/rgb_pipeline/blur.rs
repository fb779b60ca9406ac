//! Separable Gaussian blur with reflect-101 borders (`dcb|abcd|cba`).
//!
//! The kernel is symmetric, so each pass folds mirrored taps together and
//! runs as a sequence of contiguous multiply-adds over whole rows.

use crate::grid::Grid;

/// Odd kernel size no smaller than `3 sigma`.
pub fn kernel_size(sigma: f64) -> usize {
    let n = (3.0 * sigma - 1e-9).ceil().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Normalized Gaussian weights of length `size` (odd).
pub fn gaussian_kernel(sigma: f64, size: usize) -> Vec<f64> {
    assert!(size % 2 == 1, "kernel size must be odd");
    let r = (size / 2) as i64;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Reflect-101 index into `0..n`.
#[inline]
pub fn reflect(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64 - 1);
    let m = i.rem_euclid(period);
    if m >= n as i64 {
        (period - m) as usize
    } else {
        m as usize
    }
}

fn blur_rows(src: &Grid<f64>, kernel: &[f64]) -> Grid<f64> {
    let (w, h) = src.dims();
    let r = kernel.len() / 2;
    let mut out = Grid::new(w, h, 0.0f64);
    let mut padded = vec![0.0f64; w + 2 * r];
    for y in 0..h {
        let row = src.row(y);
        for (i, p) in padded.iter_mut().enumerate() {
            *p = row[reflect(i as i64 - r as i64, w)];
        }
        let dst = out.row_mut(y);
        let centre = &padded[r..r + w];
        for (d, &c) in dst.iter_mut().zip(centre) {
            *d = kernel[r] * c;
        }
        for j in 1..=r {
            let kj = kernel[r + j];
            let left = &padded[r - j..r - j + w];
            let right = &padded[r + j..r + j + w];
            for ((d, &a), &b) in dst.iter_mut().zip(left).zip(right) {
                *d += kj * (a + b);
            }
        }
    }
    out
}

fn blur_cols(src: &Grid<f64>, kernel: &[f64]) -> Grid<f64> {
    let (w, h) = src.dims();
    let r = kernel.len() / 2;
    let mut out = Grid::new(w, h, 0.0f64);
    for y in 0..h {
        let dst = out.row_mut(y);
        for (d, &c) in dst.iter_mut().zip(src.row(y)) {
            *d = kernel[r] * c;
        }
        for j in 1..=r {
            let kj = kernel[r + j];
            let up = src.row(reflect(y as i64 - j as i64, h));
            let down = src.row(reflect(y as i64 + j as i64, h));
            for ((d, &a), &b) in dst.iter_mut().zip(up).zip(down) {
                *d += kj * (a + b);
            }
        }
    }
    out
}

/// Blurs `src` with a `size x size` Gaussian of standard deviation `sigma`.
pub fn gaussian_blur(src: &Grid<f64>, sigma: f64, size: usize) -> Grid<f64> {
    let kernel = gaussian_kernel(sigma, size);
    blur_cols(&blur_rows(src, &kernel), &kernel)
}
