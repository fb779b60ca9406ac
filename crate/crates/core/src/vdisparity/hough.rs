//! Straight-line extraction from the filtered v-disparity map.
//!
//! Cells above the response floor vote with their response into an
//! `(angle, distance)` accumulator. Peaks survive non-maximum suppression
//! in a square neighborhood. The strongest usable peak is refined by a
//! count-weighted least-squares fit, clipped to its best-supported run of
//! rows, and its cells are cleared from the working map before the
//! accumulator is rebuilt for the next line.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

use super::{FilteredVDisparityMap, LineKind, VDisparityLine};

/// Peaks tried per round before giving up.
const CANDIDATES_PER_ROUND: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoughParams {
    /// Angular resolution in degrees.
    pub angle_step_deg: f64,
    /// Radial resolution in cells.
    pub rho_step: f64,
    /// Half-width of the non-maximum suppression window (2 gives 5x5).
    pub nms_radius: usize,
    /// Cells at or below this fraction of the strongest response do not vote.
    pub response_floor: f32,
    /// Lines weaker than this fraction of the first extracted line are dropped.
    pub min_support_ratio: f64,
    pub max_lines: usize,
    /// Perpendicular half-width, in cells, of the band used for fitting.
    pub fit_band: f64,
    /// Perpendicular half-width, in cells, cleared around an accepted line.
    pub clear_radius: f64,
    /// Longest run of empty rows tolerated inside one line.
    pub max_gap: usize,
    /// Steepest accepted line, in bins per row.
    pub max_slope: f64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            angle_step_deg: 1.0,
            rho_step: 1.0,
            nms_radius: 2,
            response_floor: 0.02,
            min_support_ratio: 0.005,
            max_lines: 8,
            fit_band: 1.5,
            clear_radius: 4.0,
            max_gap: 3,
            max_slope: 20.0,
        }
    }
}

struct Accumulator {
    votes: Grid<f64>,
    rho_offset: f64,
    angle_step: f64,
    rho_step: f64,
}

#[derive(Clone, Copy, Debug)]
struct Peak {
    angle: usize,
    rho: usize,
    votes: f64,
}

impl Accumulator {
    fn angle_rad(&self, a: usize) -> f64 {
        (a as f64 * self.angle_step).to_radians()
    }

    fn rho(&self, r: usize) -> f64 {
        r as f64 * self.rho_step - self.rho_offset
    }
}

/// Cell `(k, v)` sits at `(x, y) = (k + 0.5, v)`; a line is
/// `x cos(a) + y sin(a) = rho`.
fn accumulate(work: &Grid<f32>, params: &HoughParams) -> Accumulator {
    let (w, h) = work.dims();
    let n_angles = ((180.0 / params.angle_step_deg).round() as usize).max(1);
    let diag = ((w * w + h * h) as f64).sqrt().ceil() + 1.0;
    let n_rho = (2.0 * diag / params.rho_step).ceil() as usize + 1;
    let trig: Vec<(f64, f64)> = (0..n_angles)
        .map(|a| (a as f64 * params.angle_step_deg).to_radians().sin_cos())
        .collect();
    let mut votes = Grid::new(n_rho, n_angles, 0.0f64);
    for y in 0..h {
        for (k, &r) in work.row(y).iter().enumerate() {
            if r <= 0.0 {
                continue;
            }
            let x = k as f64 + 0.5;
            for (a, &(s, c)) in trig.iter().enumerate() {
                let rho = x * c + y as f64 * s;
                let idx = ((rho + diag) / params.rho_step).round() as usize;
                *votes.get_mut(idx, a) += r as f64;
            }
        }
    }
    Accumulator {
        votes,
        rho_offset: diag,
        angle_step: params.angle_step_deg,
        rho_step: params.rho_step,
    }
}

/// Local maxima of the accumulator. Angles wrap around 180 degrees, where
/// the distance changes sign.
fn find_peaks(acc: &Accumulator, radius: usize) -> Vec<Peak> {
    let (n_rho, n_angles) = acc.votes.dims();
    let radius = radius as i64;
    let mut peaks = Vec::new();
    for a in 0..n_angles {
        for r in 0..n_rho {
            let v = *acc.votes.get(r, a);
            if v <= 0.0 {
                continue;
            }
            let mut is_max = true;
            'window: for da in -radius..=radius {
                for dr in -radius..=radius {
                    if da == 0 && dr == 0 {
                        continue;
                    }
                    let mut na = a as i64 + da;
                    let mut nr = r as i64 + dr;
                    if na < 0 || na >= n_angles as i64 {
                        na = na.rem_euclid(n_angles as i64);
                        nr = n_rho as i64 - 1 - nr;
                    }
                    if nr < 0 || nr >= n_rho as i64 {
                        continue;
                    }
                    let nv = *acc.votes.get(nr as usize, na as usize);
                    // ties go to the neighbor visited first in raster order
                    let earlier = (na, nr) < (a as i64, r as i64);
                    if nv > v || (nv == v && earlier) {
                        is_max = false;
                        break 'window;
                    }
                }
            }
            if is_max {
                peaks.push(Peak { angle: a, rho: r, votes: v });
            }
        }
    }
    peaks.sort_by(|p, q| {
        q.votes
            .total_cmp(&p.votes)
            .then(p.angle.cmp(&q.angle))
            .then(p.rho.cmp(&q.rho))
    });
    peaks
}

/// Cells within `band` (perpendicular) of `x = a + s y` over `rows`, as
/// `(row, bin)` pairs with a live response.
fn band_cells(work: &Grid<f32>, a: f64, s: f64, band: f64, rows: std::ops::RangeInclusive<usize>) -> Vec<(usize, usize)> {
    let half = band * (1.0 + s * s).sqrt();
    let bins = work.width() as i64;
    let mut cells = Vec::new();
    for y in rows {
        let xc = a + s * y as f64;
        let lo = ((xc - half - 0.5).ceil() as i64).max(0);
        let hi = ((xc + half - 0.5).floor() as i64).min(bins - 1);
        for k in lo..=hi {
            if *work.get(k as usize, y) > 0.0 {
                cells.push((y, k as usize));
            }
        }
    }
    cells
}

/// Count-weighted least squares of `x` on `y`.
fn fit(cells: &[(usize, usize)], counts: &Grid<u32>) -> Option<(f64, f64)> {
    let mut sw = 0.0;
    let mut sy = 0.0;
    let mut sx = 0.0;
    for &(y, k) in cells {
        let w = *counts.get(k, y) as f64;
        sw += w;
        sy += w * y as f64;
        sx += w * (k as f64 + 0.5);
    }
    if sw <= 0.0 {
        return None;
    }
    let (my, mx) = (sy / sw, sx / sw);
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for &(y, k) in cells {
        let w = *counts.get(k, y) as f64;
        let dy = y as f64 - my;
        syy += w * dy * dy;
        sxy += w * dy * (k as f64 + 0.5 - mx);
    }
    if syy <= 1e-9 {
        return None;
    }
    let s = sxy / syy;
    Some((mx - s * my, s))
}

/// Contiguous run of rows (gaps up to `max_gap`) with the largest summed
/// response. Returns `(first, last, support)`.
fn best_run(row_support: &[f64], max_gap: usize) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    let mut current: Option<(usize, usize, f64)> = None;
    for (y, &s) in row_support.iter().enumerate() {
        if s <= 0.0 {
            continue;
        }
        current = match current {
            Some((start, end, total)) if y - end <= max_gap + 1 => Some((start, y, total + s)),
            _ => Some((y, y, s)),
        };
        let cur = current.unwrap();
        if best.is_none_or(|b| cur.2 > b.2) {
            best = Some(cur);
        }
    }
    best
}

fn refine(peak: &Peak, acc: &Accumulator, work: &Grid<f32>, counts: &Grid<u32>, params: &HoughParams) -> Option<VDisparityLine> {
    let (s_a, c_a) = acc.angle_rad(peak.angle).sin_cos();
    if c_a.abs() < 1e-6 {
        return None;
    }
    let rho = acc.rho(peak.rho);
    let mut a = rho / c_a;
    let mut s = -s_a / c_a;
    if s.abs() > params.max_slope {
        return None;
    }
    let all_rows = 0..=work.height() - 1;

    for band in [3.0 * params.fit_band, params.fit_band, params.fit_band] {
        let cells = band_cells(work, a, s, band, all_rows.clone());
        (a, s) = fit(&cells, counts)?;
        if s.abs() > params.max_slope {
            return None;
        }
    }

    let cells = band_cells(work, a, s, params.fit_band, all_rows);
    let mut row_support = vec![0.0f64; work.height()];
    for &(y, k) in &cells {
        row_support[y] += *work.get(k, y) as f64;
    }
    let (v_min, v_max, _) = best_run(&row_support, params.max_gap)?;
    if v_max == v_min {
        return None;
    }
    let run_cells: Vec<_> = cells.into_iter().filter(|&(y, _)| (v_min..=v_max).contains(&y)).collect();
    let (a, s) = fit(&run_cells, counts).unwrap_or((a, s));
    let support: f64 = band_cells(work, a, s, params.fit_band, v_min..=v_max)
        .iter()
        .map(|&(y, k)| *work.get(k, y) as f64)
        .sum();
    if support <= 0.0 {
        return None;
    }
    Some(VDisparityLine {
        intercept: a,
        slope: s,
        v_min,
        v_max,
        support,
        bin_width: 0.0,
        kind: LineKind::Unclassified,
    })
}

fn clear_line(work: &mut Grid<f32>, line: &VDisparityLine, params: &HoughParams) {
    let margin = params.clear_radius.ceil() as usize;
    let lo = line.v_min.saturating_sub(margin);
    let hi = (line.v_max + margin).min(work.height() - 1);
    for (y, k) in band_cells(work, line.intercept, line.slope, params.clear_radius, lo..=hi) {
        work.set(k, y, 0.0);
    }
}

/// Extracts straight lines, strongest first.
pub fn extract_lines(fm: &FilteredVDisparityMap, params: &HoughParams) -> Vec<VDisparityLine> {
    let max_response = fm.max_response();
    if max_response <= 0.0 || fm.rows() == 0 {
        return Vec::new();
    }
    let floor = params.response_floor * max_response;
    let mut work = fm.responses().map(|&r| if r > floor { r } else { 0.0 });

    let mut lines: Vec<VDisparityLine> = Vec::new();
    for _ in 0..params.max_lines * 4 {
        if lines.len() >= params.max_lines {
            break;
        }
        let acc = accumulate(&work, params);
        let peaks = find_peaks(&acc, params.nms_radius);
        let Some(mut line) = peaks
            .iter()
            .take(CANDIDATES_PER_ROUND)
            .find_map(|p| refine(p, &acc, &work, fm.counts(), params))
        else {
            break;
        };
        if let Some(first) = lines.first() {
            if line.support < params.min_support_ratio * first.support {
                break;
            }
        }
        clear_line(&mut work, &line, params);
        line.bin_width = fm.bin_width();
        lines.push(line);
    }
    lines.sort_by(|p, q| q.support.total_cmp(&p.support));
    lines
}
