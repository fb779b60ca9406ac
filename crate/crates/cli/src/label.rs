//! Batch labeling with a per-frame manifest.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use autolabel_core::dataset_io::{load_rgbd_pair, png_stems, write_label, FramePaths, DEPTH_DIR, LABEL_DIR, RGB_DIR};
use autolabel_core::depth_pipeline::AnomalyMap;
use autolabel_core::viz;
use autolabel_core::{run_sslg, LabelConfig, LabelOutcome};
use rayon::prelude::*;
use serde::Serialize;

use crate::{thread_pool, LabelArgs, UsageError, EXIT_OK, EXIT_PARTIAL};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, Default)]
pub struct DumpFlags {
    pub vdisp: bool,
    pub depth_maps: bool,
    pub rgb_maps: bool,
    pub viz: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameStatus {
    Ok,
    Warning,
    Error,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FrameTimings {
    pub load: f64,
    pub vdisparity: f64,
    pub depth: f64,
    pub rgb: f64,
    pub fusion: f64,
    pub write: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameRecord {
    pub name: String,
    /// Input paths relative to the dataset root; `None` when absent.
    pub rgb: Option<String>,
    pub depth: Option<String>,
    pub status: FrameStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Label path relative to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Milliseconds per stage.
    pub timings_ms: FrameTimings,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: LabelConfig,
    pub frames: Vec<FrameRecord>,
}

impl RunManifest {
    pub fn count(&self, status: FrameStatus) -> usize {
        self.frames.iter().filter(|f| f.status == status).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest always serializes")
    }
}

fn stems_in(dir: &Path) -> Result<BTreeSet<String>, UsageError> {
    if !dir.is_dir() {
        return Err(UsageError(format!("missing input directory {}", dir.display())));
    }
    Ok(png_stems(dir)?)
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn dump(outcome: &LabelOutcome, out: &Path, name: &str, flags: DumpFlags) -> autolabel_core::Result<()> {
    let im = &outcome.intermediates;
    let file = |dir: &str, suffix: &str| out.join(dir).join(format!("{name}{suffix}.png"));
    if flags.vdisp {
        let img = viz::render_v_disparity(&im.v_disparity, &im.lines);
        autolabel_core::dataset_io::write_rgb(&img, &file("vdisp", ""))?;
    }
    if flags.depth_maps {
        viz::write_drivable_mask(&im.drivable, &file("depth_maps", "_mask"))?;
        viz::write_anomaly_map(&im.d_o, &file("depth_maps", "_d_o"))?;
        viz::write_anomaly_map(&im.d_f, &file("depth_maps", "_d_f"))?;
    }
    if flags.rgb_maps {
        viz::write_anomaly_map(&AnomalyMap::normalized(im.r_o.clone()), &file("rgb_maps", "_r_o"))?;
        viz::write_anomaly_map(&im.r_f, &file("rgb_maps", "_r_f"))?;
        viz::write_anomaly_map(&im.m_a, &file("rgb_maps", "_m_a"))?;
    }
    if flags.viz {
        viz::write_label_viz(&outcome.label, &file("viz", ""))?;
    }
    Ok(())
}

fn label_frame(
    name: &str,
    has_rgb: bool,
    has_depth: bool,
    input: &Path,
    output: &Path,
    cfg: &LabelConfig,
    flags: DumpFlags,
) -> FrameRecord {
    let start = Instant::now();
    let paths = FramePaths::in_dataset(input, name);
    let rel = |dir: &str| format!("{dir}/{name}.png");
    let mut record = FrameRecord {
        name: name.to_string(),
        rgb: has_rgb.then(|| rel(RGB_DIR)),
        depth: has_depth.then(|| rel(DEPTH_DIR)),
        status: FrameStatus::Error,
        message: None,
        label: None,
        timings_ms: FrameTimings::default(),
    };
    if !(has_rgb && has_depth) {
        let missing = if has_rgb { DEPTH_DIR } else { RGB_DIR };
        record.message = Some(format!("no {missing} image for this frame"));
        return record;
    }

    let result = (|| {
        let t = Instant::now();
        let (rgb, depth) = load_rgbd_pair(&paths.rgb, &paths.depth, cfg.depth.max_range)?;
        record.timings_ms.load = ms(t);
        let outcome = run_sslg(&rgb, &depth, cfg)?;
        let t = Instant::now();
        let label_path = output.join(LABEL_DIR).join(format!("{name}.png"));
        write_label(&outcome.label, &label_path)?;
        dump(&outcome, output, name, flags)?;
        record.timings_ms.write = ms(t);
        Ok::<_, autolabel_core::Error>(outcome)
    })();

    match result {
        Ok(outcome) => {
            let t = outcome.timings;
            record.timings_ms.vdisparity = t.vdisparity_ms;
            record.timings_ms.depth = t.depth_ms;
            record.timings_ms.rgb = t.rgb_ms;
            record.timings_ms.fusion = t.fusion_ms;
            record.label = Some(rel(LABEL_DIR));
            record.status = if outcome.warning.is_some() {
                FrameStatus::Warning
            } else {
                FrameStatus::Ok
            };
            record.message = outcome.warning;
        }
        Err(e) => {
            log::error!("{name}: {e}");
            record.message = Some(e.to_string());
        }
    }
    record.timings_ms.total = ms(start);
    log::info!("{name}: {:?} in {:.0} ms", record.status, record.timings_ms.total);
    record
}

/// Labels every frame of `input` into `output` and writes the manifest.
/// Returns the exit code alongside the manifest; frame failures are
/// recorded, not raised.
pub fn cmd_label(
    input: &Path,
    output: &Path,
    cfg: &LabelConfig,
    jobs: Option<usize>,
    flags: DumpFlags,
) -> Result<(u8, RunManifest), UsageError> {
    cfg.validate()?;
    let rgb = stems_in(&input.join(RGB_DIR))?;
    let depth = stems_in(&input.join(DEPTH_DIR))?;
    let names: Vec<&String> = rgb.union(&depth).collect();
    std::fs::create_dir_all(output).map_err(|e| UsageError(format!("cannot create {}: {e}", output.display())))?;

    let pool = thread_pool(jobs)?;
    log::info!("labeling {} frames with {} workers", names.len(), pool.current_num_threads());
    let frames: Vec<FrameRecord> = pool.install(|| {
        names
            .par_iter()
            .map(|name| label_frame(name, rgb.contains(*name), depth.contains(*name), input, output, cfg, flags))
            .collect()
    });
    let manifest = RunManifest {
        config: *cfg,
        frames,
    };
    let manifest_path = output.join(MANIFEST_FILE);
    std::fs::write(&manifest_path, manifest.to_json())
        .map_err(|e| UsageError(format!("cannot write {}: {e}", manifest_path.display())))?;
    let code = if manifest.count(FrameStatus::Error) > 0 {
        EXIT_PARTIAL
    } else {
        EXIT_OK
    };
    Ok((code, manifest))
}

pub fn load_config(path: &Path) -> Result<LabelConfig, UsageError> {
    if !path.is_file() {
        return Err(UsageError(format!("config file {} not found", path.display())));
    }
    Ok(LabelConfig::load(path)?)
}

pub fn run(args: &LabelArgs) -> Result<u8, UsageError> {
    let mut cfg = load_config(&args.config)?;
    args.overrides.apply(&mut cfg);
    let flags = DumpFlags {
        vdisp: args.dump_vdisp,
        depth_maps: args.dump_depth_maps,
        rgb_maps: args.dump_rgb_maps,
        viz: args.dump_viz,
    };
    let (code, manifest) = cmd_label(&args.input, &args.output, &cfg, args.jobs, flags)?;
    eprintln!(
        "labeled {} frames: {} ok, {} warning, {} error",
        manifest.frames.len(),
        manifest.count(FrameStatus::Ok),
        manifest.count(FrameStatus::Warning),
        manifest.count(FrameStatus::Error)
    );
    Ok(code)
}
