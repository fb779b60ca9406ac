//! sRGB (D65) to CIELAB conversion.

use crate::grid::Grid;

use super::LabImage;

const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];
const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

fn srgb_to_linear(c: u8) -> f64 {
    let c = c as f64 / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    if t > EPSILON {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

/// Linearization table indexed by the 8-bit channel value.
fn linear_lut() -> [f64; 256] {
    let mut lut = [0.0; 256];
    for (i, v) in lut.iter_mut().enumerate() {
        *v = srgb_to_linear(i as u8);
    }
    lut
}

#[inline]
fn convert(rgb: [u8; 3], lut: &[f64; 256]) -> [f64; 3] {
    let [r, g, b] = rgb.map(|c| lut[c as usize]);
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    let fx = lab_f(x / WHITE[0]);
    let fy = lab_f(y / WHITE[1]);
    let fz = lab_f(z / WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Single-pixel conversion, `[L, a, b]`.
pub fn srgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    convert(rgb, &linear_lut())
}

pub fn rgb_to_lab(img: &Grid<[u8; 3]>) -> LabImage {
    let lut = linear_lut();
    let (w, h) = img.dims();
    let mut l = Vec::with_capacity(w * h);
    let mut a = Vec::with_capacity(w * h);
    let mut b = Vec::with_capacity(w * h);
    for &px in img.as_slice() {
        let [cl, ca, cb] = convert(px, &lut);
        l.push(cl);
        a.push(ca);
        b.push(cb);
    }
    let wrap = |v| Grid::from_vec(w, h, v).expect("sized from the source image");
    LabImage {
        channels: [wrap(l), wrap(a), wrap(b)],
    }
}
