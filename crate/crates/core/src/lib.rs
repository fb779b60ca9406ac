//! Automatic pixel-wise label generation for drivable areas and road
//! anomalies from paired RGB and depth frames.
//!
//! The labeling pipeline runs in four stages:
//!
//! 1. [`vdisparity`]: depth is turned into disparity, accumulated into a
//!    row-indexed disparity histogram (the v-disparity map), ridge-filtered,
//!    and searched for straight lines. Lines are classified into the
//!    drivable ground plane, the far "infinity" plane and anomalies.
//! 2. [`depth_pipeline`]: the classified lines are projected back into the
//!    image to obtain the drivable mask and a depth anomaly map, which is
//!    augmented with the holes enclosed by the drivable mask.
//! 3. [`rgb_pipeline`]: a Lab color-contrast map against a wide Gaussian
//!    surround, restricted to the drivable region.
//! 4. [`fusion`]: both anomaly maps are blended and thresholded into the
//!    final three-class label.
//!
//! [`evaluation`] scores labels against ground truth and [`synth`] renders
//! synthetic RGB-D scenes with exact ground truth.

// Validation uses `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dataset_io;
pub mod depth_pipeline;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod grid;
pub mod rgb_pipeline;
pub mod synth;
pub mod vdisparity;
pub mod viz;

pub use config::LabelConfig;
pub use dataset_io::{DepthImage, LabelClass, LabelImage, NormalizedDepthImage, RgbImage};
pub use depth_pipeline::{AnomalyMap, DrivableMask};
pub use error::{Error, Result};
pub use fusion::{run_sslg, LabelOutcome};
pub use grid::Grid;
pub use vdisparity::{CameraModel, LineKind, VDisparityLine, VDisparityMap};
