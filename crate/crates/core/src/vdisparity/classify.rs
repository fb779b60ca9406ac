//! Assigns roles to extracted lines: the dominant line is the drivable
//! ground, the line with the smallest mean disparity among the rest is the
//! far (infinity) plane, and the remaining lines become anomalies once
//! lines too short to stand out of the ground are dropped.

use std::cmp::Ordering;

use crate::error::{Error, Result};

use super::{CameraModel, LineKind, VDisparityLine};

/// Minimum anomaly extent in rows when no camera model is available.
pub const FALLBACK_MIN_ROWS: f64 = 8.0;

/// Rows spanned by an object `height` meters tall standing on the ground
/// at row `contact_row`, where the ground disparity is `disparity`.
///
/// The contact point is back-projected to world coordinates, raised by
/// `height` and re-projected.
pub fn min_rows_for_height(cam: &CameraModel, contact_row: f64, disparity: f64, height: f64) -> Option<f64> {
    if disparity <= 0.0 {
        return None;
    }
    let depth = cam.fb() / disparity;
    let big_v = contact_row - cam.v0;
    let (y, z) = cam.world_from_row_depth(big_v, depth);
    let (_, raised_v, _) = cam.project(0.0, y - height, z)?;
    let rows = big_v - raised_v;
    (rows.is_finite() && rows > 0.0).then_some(rows)
}

fn dominance(a: &VDisparityLine, b: &VDisparityLine) -> Ordering {
    a.support
        .total_cmp(&b.support)
        .then(a.row_extent().cmp(&b.row_extent()))
}

/// Vertical length in rows of `line`, measured from its top down to where
/// it meets the ground line (or its own bottom when it never does).
fn length_to_ground(line: &VDisparityLine, ground: &VDisparityLine) -> (f64, f64) {
    let top = line.v_min as f64;
    let own_bottom = line.v_max as f64;
    let ds = line.slope - ground.slope;
    let contact = if ds.abs() > 1e-9 {
        let v = (ground.intercept - line.intercept) / ds;
        if v.is_finite() && v >= top {
            v.min(ground.v_max as f64).max(own_bottom)
        } else {
            own_bottom
        }
    } else {
        own_bottom
    };
    (contact - top, contact)
}

/// Labels lines as drivable, infinity or anomaly.
///
/// Anomaly candidates shorter than the projection of `min_anomaly_height`
/// at their ground contact are discarded; without a camera model the
/// threshold is [`FALLBACK_MIN_ROWS`]. Ties in support go to the line with
/// the longer row extent.
pub fn classify_lines(
    lines: &[VDisparityLine],
    cam: Option<&CameraModel>,
    min_anomaly_height: f64,
) -> Result<Vec<VDisparityLine>> {
    let drivable_idx = lines
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| dominance(a, b).then(j.cmp(i)))
        .map(|(i, _)| i)
        .ok_or(Error::NoGroundStructure)?;
    let mut drivable = lines[drivable_idx];
    drivable.kind = LineKind::Drivable;

    let infinity_idx = lines
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != drivable_idx)
        .min_by(|(_, a), (_, b)| a.mean_disparity().total_cmp(&b.mean_disparity()))
        .map(|(i, _)| i);

    let mut out = vec![drivable];
    if let Some(i) = infinity_idx {
        let mut inf = lines[i];
        inf.kind = LineKind::Infinity;
        out.push(inf);
    }
    for (i, line) in lines.iter().enumerate() {
        if i == drivable_idx || Some(i) == infinity_idx {
            continue;
        }
        let (length, contact) = length_to_ground(line, &drivable);
        let needed = cam
            .and_then(|c| min_rows_for_height(c, contact, drivable.disparity_at(contact), min_anomaly_height))
            .unwrap_or(FALLBACK_MIN_ROWS);
        if length >= needed {
            let mut a = *line;
            a.kind = LineKind::Anomaly;
            out.push(a);
        }
    }
    Ok(out)
}
