//! Scoring predicted labels against ground truth.
//!
//! Metrics are percentages. A metric whose denominator is zero is
//! undefined (`None`) and is left out of the class mean. Dataset scores use
//! one confusion matrix summed over every pixel of every image unless
//! [`Aggregation::PerImage`] is requested.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset_io::{png_stems, read_label, LabelClass, LabelImage, LABEL_DIR};
use crate::error::{ensure_same_size, Result};

/// Rows are ground-truth classes, columns predicted classes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        Self { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::default();
        for i in 0..3 {
            for j in 0..3 {
                t.counts[j][i] = self.counts[i][j];
            }
        }
        t
    }

    pub fn add(&mut self, other: &Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }

    fn true_positives(&self, c: usize) -> u64 {
        self.counts[c][c]
    }

    fn predicted(&self, c: usize) -> u64 {
        (0..3).map(|i| self.counts[i][c]).sum()
    }

    fn actual(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut acc, cm| {
            acc.add(&cm);
            acc
        })
    }
}

pub fn confusion(gt: &LabelImage, pred: &LabelImage) -> Result<ConfusionMatrix> {
    ensure_same_size(gt.dims(), pred.dims())?;
    let mut cm = ConfusionMatrix::default();
    for (&g, &p) in gt.raw().as_slice().iter().zip(pred.raw().as_slice()) {
        cm.counts[g as usize][p as usize] += 1;
    }
    Ok(cm)
}

/// Precision, recall and IoU in percent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub iou: Option<f64>,
}

fn percent(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl ClassMetrics {
    fn mean(items: &[ClassMetrics]) -> ClassMetrics {
        ClassMetrics {
            precision: mean_of(items.iter().map(|m| m.precision)),
            recall: mean_of(items.iter().map(|m| m.recall)),
            iou: mean_of(items.iter().map(|m| m.iou)),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Indexed by [`LabelClass::index`].
    pub per_class: [ClassMetrics; 3],
    pub mean: ClassMetrics,
}

impl MetricsReport {
    pub fn class(&self, class: LabelClass) -> &ClassMetrics {
        &self.per_class[class.index()]
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let per_class = [0, 1, 2].map(|c| {
        let tp = cm.true_positives(c);
        let fp = cm.predicted(c) - tp;
        let fn_ = cm.actual(c) - tp;
        ClassMetrics {
            precision: percent(tp, tp + fp),
            recall: percent(tp, tp + fn_),
            iou: percent(tp, tp + fp + fn_),
        }
    });
    MetricsReport {
        mean: ClassMetrics::mean(&per_class),
        per_class,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Sum confusions over all pixels of all images, then compute metrics.
    #[default]
    Global,
    /// Compute metrics per image and average the defined values.
    PerImage,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageScore {
    pub name: String,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetReport {
    pub aggregation: Aggregation,
    pub summary: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub images: Vec<ImageScore>,
    /// Ground-truth frames with no prediction.
    pub missing_predictions: Vec<String>,
    /// Predictions with no ground truth.
    pub unmatched_predictions: Vec<String>,
    /// Frames present on both sides that could not be scored.
    pub failures: Vec<(String, String)>,
}

impl DatasetReport {
    pub fn is_complete(&self) -> bool {
        self.missing_predictions.is_empty() && self.failures.is_empty()
    }
}

/// `dir/label` when it exists, otherwise `dir` itself.
pub fn label_dir(dir: &Path) -> PathBuf {
    let nested = dir.join(LABEL_DIR);
    if nested.is_dir() {
        nested
    } else {
        dir.to_path_buf()
    }
}

/// Combines per-image scores into a dataset summary.
pub fn aggregate(images: &[ImageScore], aggregation: Aggregation) -> (ConfusionMatrix, MetricsReport) {
    let total: ConfusionMatrix = images.iter().map(|s| s.confusion).sum();
    let summary = match aggregation {
        Aggregation::Global => metrics(&total),
        Aggregation::PerImage => {
            let per_class = [0, 1, 2].map(|c| {
                let of_class: Vec<_> = images.iter().map(|s| s.metrics.per_class[c]).collect();
                ClassMetrics::mean(&of_class)
            });
            MetricsReport {
                mean: ClassMetrics::mean(&per_class),
                per_class,
            }
        }
    };
    (total, summary)
}

/// Scores every label in `pred_dir` against the same-named label in
/// `gt_dir`. Either directory may be a dataset root with a `label/` child.
pub fn evaluate_dataset(gt_dir: &Path, pred_dir: &Path, aggregation: Aggregation) -> Result<DatasetReport> {
    let gt_dir = label_dir(gt_dir);
    let pred_dir = label_dir(pred_dir);
    let gt_names = png_stems(&gt_dir)?;
    let pred_names = png_stems(&pred_dir)?;

    let scored: Vec<(String, Result<ImageScore>)> = gt_names
        .iter()
        .filter(|n| pred_names.contains(*n))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|name| {
            let score = (|| {
                let gt = read_label(&gt_dir.join(format!("{name}.png")))?;
                let pred = read_label(&pred_dir.join(format!("{name}.png")))?;
                let cm = confusion(&gt, &pred)?;
                Ok(ImageScore {
                    name: name.clone(),
                    confusion: cm,
                    metrics: metrics(&cm),
                })
            })();
            (name.clone(), score)
        })
        .collect();

    let mut images = Vec::new();
    let mut failures = Vec::new();
    for (name, score) in scored {
        match score {
            Ok(s) => images.push(s),
            Err(e) => failures.push((name, e.to_string())),
        }
    }
    let (confusion, summary) = aggregate(&images, aggregation);
    Ok(DatasetReport {
        aggregation,
        summary,
        confusion,
        images,
        missing_predictions: gt_names.difference(&pred_names).cloned().collect(),
        unmatched_predictions: pred_names.difference(&gt_names).cloned().collect(),
        failures,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

/// Plain-text table: one column group per class plus the mean.
pub fn format_table(report: &MetricsReport) -> String {
    let groups = [
        ("Unknown Area", &report.per_class[0]),
        ("Drivable Area", &report.per_class[1]),
        ("Road Anomalies", &report.per_class[2]),
        ("All", &report.mean),
    ];
    let mut head = String::new();
    let mut sub = String::new();
    let mut row = String::new();
    for (name, m) in groups {
        let _ = write!(head, "| {name:^26} ");
        let _ = write!(sub, "| {:>8}{:>9}{:>9} ", "Pre", "Rec", "IoU");
        let _ = write!(row, "| {:>8}{:>9}{:>9} ", cell(m.precision), cell(m.recall), cell(m.iou));
    }
    format!("{head}|\n{sub}|\n{row}|\n")
}
