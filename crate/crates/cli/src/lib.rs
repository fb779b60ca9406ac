//! Command-line front end: `label`, `eval` and `synth` subcommands.
//!
//! Exit codes are 0 on success, 1 when some frames failed (or, for `eval`,
//! were missing) and 2 for usage or configuration errors.

pub mod eval;
pub mod label;
pub mod synth;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_PARTIAL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "autolabel", version, about = "Automatic drivable-area and road-anomaly labels from RGB-D frames")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label every rgb/depth pair of a dataset directory.
    Label(LabelArgs),
    /// Score predicted labels against ground truth.
    Eval(EvalArgs),
    /// Render synthetic rgb/depth/label triplets from a scene file.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    /// Dataset directory holding `rgb/` and `depth/`.
    pub input: PathBuf,
    /// Receives `label/`, `manifest.json` and any debug dumps.
    pub output: PathBuf,
    /// TOML configuration file.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Worker threads; defaults to the number of logical CPUs.
    #[arg(short, long)]
    pub jobs: Option<usize>,
    /// Write the v-disparity map with detected lines.
    #[arg(long)]
    pub dump_vdisp: bool,
    /// Write the drivable mask and depth anomaly maps.
    #[arg(long)]
    pub dump_depth_maps: bool,
    /// Write the color anomaly maps.
    #[arg(long)]
    pub dump_rgb_maps: bool,
    /// Write color-coded labels (blue unknown, green drivable, red anomaly).
    #[arg(long)]
    pub dump_viz: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Values that replace the ones read from the config file.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// Weight of the color anomaly map in the fused map.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fused values above this are labeled anomaly.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Color blur sigma is min(h, w) divided by this.
    #[arg(long)]
    pub sigma_s: Option<f64>,
    /// Band around v-disparity lines, in bins.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Disparity bins in the v-disparity map.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Depth cap in meters.
    #[arg(long)]
    pub max_range: Option<f32>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut autolabel_core::LabelConfig) {
        if let Some(v) = self.alpha {
            cfg.anomaly.alpha = v;
        }
        if let Some(v) = self.kappa {
            cfg.anomaly.kappa = v;
        }
        if let Some(v) = self.sigma_s {
            cfg.anomaly.sigma_s = v;
        }
        if let Some(v) = self.tol {
            cfg.depth.tol = v;
        }
        if let Some(v) = self.bins {
            cfg.depth.bins = v;
        }
        if let Some(v) = self.max_range {
            cfg.depth.max_range = v;
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth labels (a directory of PNGs or a dataset root).
    pub gt: PathBuf,
    /// Predicted labels, same layout.
    pub pred: PathBuf,
    /// Text report path; the JSON report goes next to it with a `.json`
    /// extension. Without it the table is printed only.
    #[arg(short, long)]
    pub report: Option<PathBuf>,
    /// Average per-image metrics instead of pooling all pixels.
    #[arg(long)]
    pub per_image: bool,
    /// Worker threads; defaults to the number of logical CPUs.
    #[arg(short, long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene file (TOML).
    pub spec: PathBuf,
    /// Dataset directory to create.
    pub output: PathBuf,
    /// Number of scenes to render.
    #[arg(short = 'n', long, default_value_t = 1)]
    pub count: usize,
    /// Base seed; scene i uses stream i of this seed.
    #[arg(short, long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of logical CPUs.
    #[arg(short, long)]
    pub jobs: Option<usize>,
}

/// Error that maps to [`EXIT_USAGE`].
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl From<autolabel_core::Error> for UsageError {
    fn from(e: autolabel_core::Error) -> Self {
        UsageError(e.to_string())
    }
}

pub(crate) fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, UsageError> {
    if jobs == Some(0) {
        return Err(UsageError("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| UsageError(format!("cannot start worker pool: {e}")))
}

pub fn run(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Label(args) => label::run(&args),
        Command::Eval(args) => eval::run(&args),
        Command::Synth(args) => synth::run(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
