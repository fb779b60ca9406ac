//! Label scoring reports.

use std::fmt::Write as _;
use std::path::Path;

use autolabel_core::evaluation::{evaluate_dataset, format_table, Aggregation, DatasetReport};
use autolabel_core::LabelClass;

use crate::{thread_pool, EvalArgs, UsageError, EXIT_OK, EXIT_PARTIAL};

/// Human-readable report: metric table, pooled confusion matrix and any
/// frames that could not be scored.
pub fn render_text(report: &DatasetReport) -> String {
    let mut out = String::new();
    let how = match report.aggregation {
        Aggregation::Global => "pooled over all pixels",
        Aggregation::PerImage => "averaged over images",
    };
    let _ = writeln!(out, "{} images scored, metrics {how} (percent)\n", report.images.len());
    out.push_str(&format_table(&report.summary));
    let _ = writeln!(out, "\nconfusion (rows ground truth, columns prediction)");
    let _ = writeln!(out, "{:>10}{:>12}{:>12}{:>12}", "", "unknown", "drivable", "anomaly");
    for class in LabelClass::ALL {
        let row = report.confusion.counts[class.index()];
        let _ = writeln!(out, "{:>10}{:>12}{:>12}{:>12}", class.name(), row[0], row[1], row[2]);
    }
    for name in &report.missing_predictions {
        let _ = writeln!(out, "missing prediction: {name}");
    }
    for name in &report.unmatched_predictions {
        let _ = writeln!(out, "prediction without ground truth: {name}");
    }
    for (name, err) in &report.failures {
        let _ = writeln!(out, "failed: {name}: {err}");
    }
    out
}

pub fn cmd_eval(
    gt: &Path,
    pred: &Path,
    report_path: Option<&Path>,
    aggregation: Aggregation,
    jobs: Option<usize>,
) -> Result<(u8, DatasetReport), UsageError> {
    for dir in [gt, pred] {
        if !dir.is_dir() {
            return Err(UsageError(format!("{} is not a directory", dir.display())));
        }
    }
    let report = thread_pool(jobs)?.install(|| evaluate_dataset(gt, pred, aggregation))?;
    let text = render_text(&report);
    print!("{text}");
    if let Some(path) = report_path {
        let write = |p: &Path, body: String| {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| UsageError(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(p, body).map_err(|e| UsageError(format!("cannot write {}: {e}", p.display())))
        };
        write(path, text)?;
        let json = serde_json::to_string_pretty(&report).expect("report always serializes");
        write(&path.with_extension("json"), json)?;
    }
    let code = if report.is_complete() { EXIT_OK } else { EXIT_PARTIAL };
    Ok((code, report))
}

pub fn run(args: &EvalArgs) -> Result<u8, UsageError> {
    let aggregation = if args.per_image {
        Aggregation::PerImage
    } else {
        Aggregation::Global
    };
    let (code, _) = cmd_eval(&args.gt, &args.pred, args.report.as_deref(), aggregation, args.jobs)?;
    Ok(code)
}
