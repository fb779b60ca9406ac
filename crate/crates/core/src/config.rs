//! Pipeline configuration, read from and written to TOML.
//!
//! ```toml
//! version = 1
//!
//! [camera]
//! f = 230.0          # focal length, px
//! baseline = 0.055   # m
//! pitch = 0.3        # rad, positive looking down
//! # u0, v0 default to the image centre
//!
//! [depth]
//! max_range = 10.0   # m
//! bins = 256
//! filter_sigma = 1.0 # bins
//! tol = 2.0          # bins
//! min_anomaly_height = 0.05
//! # min_depth = 0.5  # fixes the disparity span to [0, f*b/min_depth]
//!
//! [hough]            # see HoughParams
//!
//! [anomaly]
//! sigma_s = 12.0
//! alpha = 0.5
//! kappa = 0.3
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset_io::DEFAULT_MAX_RANGE;
use crate::error::{Error, Result};
use crate::rgb_pipeline::RgbAnomalyConfig;
use crate::vdisparity::{CameraModel, HoughParams};

pub const CONFIG_VERSION: u32 = 1;

/// Camera parameters as stored on disk. The principal point may be left
/// out and is then taken as the centre of each image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub f: f64,
    pub baseline: f64,
    pub pitch: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
}

impl CameraConfig {
    pub fn resolve(&self, width: usize, height: usize) -> Result<CameraModel> {
        CameraModel::new(
            self.f,
            self.baseline,
            self.pitch,
            self.u0.unwrap_or((width as f64 - 1.0) / 2.0),
            self.v0.unwrap_or((height as f64 - 1.0) / 2.0),
        )
    }
}

impl From<CameraModel> for CameraConfig {
    fn from(cam: CameraModel) -> Self {
        Self {
            f: cam.f,
            baseline: cam.baseline,
            pitch: cam.pitch,
            u0: Some(cam.u0),
            v0: Some(cam.v0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthConfig {
    pub max_range: f32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_depth: Option<f64>,
    pub bins: usize,
    pub filter_sigma: f64,
    pub tol: f64,
    pub min_anomaly_height: f64,
}

impl Default for DepthConfig {
    fn default() -> Self {
        Self {
            max_range: DEFAULT_MAX_RANGE,
            min_depth: None,
            bins: 256,
            filter_sigma: 1.0,
            tol: 2.0,
            min_anomaly_height: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelConfig {
    pub version: u32,
    pub camera: CameraConfig,
    #[serde(default)]
    pub depth: DepthConfig,
    #[serde(default)]
    pub hough: HoughParams,
    #[serde(default)]
    pub anomaly: RgbAnomalyConfig,
}

impl LabelConfig {
    pub fn new(camera: CameraConfig) -> Self {
        Self {
            version: CONFIG_VERSION,
            camera,
            depth: DepthConfig::default(),
            hough: HoughParams::default(),
            anomaly: RgbAnomalyConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        // principal point is irrelevant to the checks below
        self.camera.resolve(1, 1)?;
        let d = &self.depth;
        if !(d.max_range > 0.0 && d.max_range.is_finite()) {
            return Err(Error::Config(format!("max_range must be positive, got {}", d.max_range)));
        }
        if let Some(min) = d.min_depth {
            if !(min > 0.0 && min < d.max_range as f64) {
                return Err(Error::Config(format!("min_depth must lie in (0, max_range), got {min}")));
            }
        }
        if d.bins < 2 {
            return Err(Error::Config(format!("bins must be at least 2, got {}", d.bins)));
        }
        if !(d.filter_sigma > 0.0) {
            return Err(Error::Config(format!("filter_sigma must be positive, got {}", d.filter_sigma)));
        }
        if !(d.tol >= 0.0) {
            return Err(Error::Config(format!("tol must be non-negative, got {}", d.tol)));
        }
        if !(d.min_anomaly_height >= 0.0) {
            return Err(Error::Config(format!(
                "min_anomaly_height must be non-negative, got {}",
                d.min_anomaly_height
            )));
        }
        let h = &self.hough;
        if !(h.angle_step_deg > 0.0 && h.rho_step > 0.0 && h.max_slope > 0.0) {
            return Err(Error::Config("hough steps and max_slope must be positive".into()));
        }
        self.anomaly.validate()
    }
}
