//! Synthetic dataset generation.

use std::path::Path;

use autolabel_core::config::CameraConfig;
use autolabel_core::dataset_io::{write_depth, write_label, write_rgb, FramePaths, LABEL_DIR};
use autolabel_core::synth::SceneTemplate;
use autolabel_core::LabelConfig;
use rayon::prelude::*;

use crate::{thread_pool, SynthArgs, UsageError, EXIT_OK, EXIT_PARTIAL};

/// Config written next to the generated frames, matching their camera.
pub const CONFIG_FILE: &str = "config.toml";

pub fn frame_name(index: usize) -> String {
    format!("scene_{index:05}")
}

/// Label config whose camera and depth cap match the template's scene.
pub fn matching_config(template: &SceneTemplate) -> LabelConfig {
    let mut cfg = LabelConfig::new(CameraConfig::from(template.scene.camera));
    cfg.depth.max_range = template.scene.max_range;
    cfg
}

pub fn cmd_synth(
    spec_path: &Path,
    output: &Path,
    count: usize,
    seed: u64,
    jobs: Option<usize>,
) -> Result<u8, UsageError> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", spec_path.display())))?;
    let template = SceneTemplate::from_toml_str(&text)
        .map_err(|e| UsageError(format!("{}: {e}", spec_path.display())))?;
    std::fs::create_dir_all(output).map_err(|e| UsageError(format!("cannot create {}: {e}", output.display())))?;
    matching_config(&template).save(&output.join(CONFIG_FILE))?;

    let failures: Vec<String> = thread_pool(jobs)?.install(|| {
        (0..count)
            .into_par_iter()
            .filter_map(|i| {
                let name = frame_name(i);
                let (scene, render_seed) = template.instantiate(seed, i as u64);
                let written = scene.render(render_seed).and_then(|r| {
                    let paths = FramePaths::in_dataset(output, &name);
                    write_rgb(&r.rgb, &paths.rgb)?;
                    write_depth(&r.depth, &paths.depth)?;
                    write_label(&r.label, &output.join(LABEL_DIR).join(format!("{name}.png")))
                });
                written.err().map(|e| format!("{name}: {e}"))
            })
            .collect()
    });
    for f in &failures {
        eprintln!("error: {f}");
    }
    Ok(if failures.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

pub fn run(args: &SynthArgs) -> Result<u8, UsageError> {
    cmd_synth(&args.spec, &args.output, args.count, args.seed, args.jobs)
}
