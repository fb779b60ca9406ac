//! Final label generation: fuse the color and depth anomaly maps and apply
//! the anomaly / drivable / unknown decision per pixel.

use std::time::Instant;

use log::warn;

use crate::config::LabelConfig;
use crate::dataset_io::{DepthImage, LabelClass, LabelImage, RgbImage};
use crate::depth_pipeline::{
    extract_depth_anomalies, extract_drivable_mask, find_holes, finalize_depth_anomalies, AnomalyMap, DrivableMask,
};
use crate::error::{ensure_same_size, Error, Result};
use crate::grid::Grid;
use crate::rgb_pipeline::{restrict_to_region, rgb_anomaly_map, rgb_to_lab};
use crate::vdisparity::{
    build_v_disparity, classify_lines, depth_to_disparity, extract_lines, filter_v_disparity, CameraModel,
    FilteredVDisparityMap, LineKind, VDisparityLine, VDisparityMap,
};

/// The fused map `M_A`; same representation as the per-source maps.
pub type FinalAnomalyMap = AnomalyMap;

/// `alpha * r_f + (1 - alpha) * d_f`.
pub fn fuse_anomaly_maps(r_f: &AnomalyMap, d_f: &AnomalyMap, alpha: f64) -> Result<FinalAnomalyMap> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let a = alpha as f32;
    let b = (1.0 - alpha) as f32;
    let fused = r_f.grid().zip_map(d_f.grid(), |&r, &d| a * r + b * d)?;
    Ok(AnomalyMap::from_grid(fused))
}

/// Anomaly where `m_a > kappa`, otherwise drivable where the mask says
/// so, otherwise unknown. The comparison runs in the map's `f32`
/// precision, so a map value equal to `kappa as f32` is not an anomaly.
pub fn generate_label(m_a: &FinalAnomalyMap, m_d: &DrivableMask, kappa: f64) -> Result<LabelImage> {
    ensure_same_size(m_a.dims(), m_d.dims())?;
    let (w, h) = m_a.dims();
    let kappa = kappa as f32;
    Ok(LabelImage::from_classes(Grid::from_fn(w, h, |x, y| {
        if m_a.value(x, y) > kappa {
            LabelClass::Anomaly
        } else if m_d.is_drivable(x, y) {
            LabelClass::Drivable
        } else {
            LabelClass::Unknown
        }
    })))
}

/// Wall-clock time spent in each stage, in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub vdisparity_ms: f64,
    pub depth_ms: f64,
    pub rgb_ms: f64,
    pub fusion_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.vdisparity_ms + self.depth_ms + self.rgb_ms + self.fusion_ms
    }
}

/// Everything computed on the way to the label, kept for debug dumps.
#[derive(Clone, Debug)]
pub struct Intermediates {
    pub camera: CameraModel,
    pub disparities: Grid<f32>,
    pub v_disparity: VDisparityMap,
    pub filtered: FilteredVDisparityMap,
    /// Classified lines; empty when no ground was found.
    pub lines: Vec<VDisparityLine>,
    pub drivable: DrivableMask,
    pub holes: Grid<bool>,
    pub d_o: AnomalyMap,
    pub d_f: AnomalyMap,
    pub r_o: Grid<f32>,
    pub r_f: AnomalyMap,
    pub m_a: FinalAnomalyMap,
}

impl Intermediates {
    pub fn lines_of(&self, kind: LineKind) -> impl Iterator<Item = &VDisparityLine> {
        self.lines.iter().filter(move |l| l.kind == kind)
    }
}

#[derive(Clone, Debug)]
pub struct LabelOutcome {
    pub label: LabelImage,
    /// Set when the frame could not be labeled and came out all-unknown.
    pub warning: Option<String>,
    pub intermediates: Intermediates,
    pub timings: StageTimings,
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs the full labeling pipeline on one RGB-D pair.
///
/// A frame without detectable ground yields an all-unknown label and a
/// warning rather than an error; errors are reserved for inconsistent
/// inputs or configuration.
pub fn run_sslg(rgb: &RgbImage, depth: &DepthImage, cfg: &LabelConfig) -> Result<LabelOutcome> {
    cfg.validate()?;
    ensure_same_size(rgb.dims(), depth.dims())?;
    let (w, h) = depth.dims();
    let camera = cfg.camera.resolve(w, h)?;
    let dc = &cfg.depth;
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let disparities = depth_to_disparity(depth, &camera);
    let max_disparity = dc.min_depth.map(|z| camera.fb() / z);
    let v_disparity = build_v_disparity(&disparities, dc.bins, max_disparity)?;
    let filtered = filter_v_disparity(&v_disparity, dc.filter_sigma)?;
    let raw_lines = extract_lines(&filtered, &cfg.hough);
    let classified = classify_lines(&raw_lines, Some(&camera), dc.min_anomaly_height);
    timings.vdisparity_ms = elapsed_ms(t);

    let (lines, warning) = match classified {
        Ok(lines) => (lines, None),
        Err(Error::NoGroundStructure) => {
            let msg = "no ground plane found; frame left unknown".to_string();
            warn!("{msg}");
            (Vec::new(), Some(msg))
        }
        Err(e) => return Err(e),
    };

    let t = Instant::now();
    let drivable = match lines.iter().find(|l| l.kind == LineKind::Drivable) {
        Some(line) => extract_drivable_mask(&disparities, line, dc.tol),
        None => DrivableMask::empty(w, h),
    };
    let anomaly_lines: Vec<_> = lines.iter().filter(|l| l.kind == LineKind::Anomaly).copied().collect();
    let d_o = extract_depth_anomalies(&disparities, &anomaly_lines, &drivable, dc.tol)?;
    let holes = find_holes(&drivable);
    let d_f = finalize_depth_anomalies(&d_o, &holes)?;
    timings.depth_ms = elapsed_ms(t);

    let t = Instant::now();
    let r_o = if warning.is_some() {
        // nothing survives the mask, so skip the expensive blur
        Grid::new(w, h, 0.0)
    } else {
        rgb_anomaly_map(&rgb_to_lab(rgb), &cfg.anomaly)?
    };
    let r_f = restrict_to_region(&r_o, &drivable, &holes)?;
    timings.rgb_ms = elapsed_ms(t);

    let t = Instant::now();
    let m_a = fuse_anomaly_maps(&r_f, &d_f, cfg.anomaly.alpha)?;
    let label = generate_label(&m_a, &drivable, cfg.anomaly.kappa)?;
    timings.fusion_ms = elapsed_ms(t);

    Ok(LabelOutcome {
        label,
        warning,
        intermediates: Intermediates {
            camera,
            disparities,
            v_disparity,
            filtered,
            lines,
            drivable,
            holes,
            d_o,
            d_f,
            r_o,
            r_f,
            m_a,
        },
        timings,
    })
}
