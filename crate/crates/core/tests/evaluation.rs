use autolabel_core::dataset_io::write_label;
use autolabel_core::evaluation::{
    aggregate, confusion, evaluate_dataset, format_table, metrics, Aggregation, ConfusionMatrix, ImageScore,
};
use autolabel_core::{Grid, LabelClass, LabelImage};
use proptest::prelude::*;
use std::path::Path;

fn label(w: usize, h: usize, values: &[u8]) -> LabelImage {
    LabelImage::from_raw(Grid::from_vec(w, h, values.to_vec()).unwrap()).unwrap()
}

/// Per-class precision, recall and IoU in percent straight from pixel pairs.
fn brute_force(gt: &[u8], pred: &[u8], class: u8) -> [Option<f64>; 3] {
    let tp = gt.iter().zip(pred).filter(|&(&g, &p)| g == class && p == class).count() as f64;
    let predicted = pred.iter().filter(|&&p| p == class).count() as f64;
    let actual = gt.iter().filter(|&&g| g == class).count() as f64;
    let union = gt.iter().zip(pred).filter(|&(&g, &p)| g == class || p == class).count() as f64;
    let ratio = |n: f64, d: f64| (d > 0.0).then(|| 100.0 * n / d);
    [ratio(tp, predicted), ratio(tp, actual), ratio(tp, union)]
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() < 1e-9,
        (None, None) => true,
        _ => false,
    }
}

fn pixels() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (prop::collection::vec(0u8..3, 64), prop::collection::vec(0u8..3, 64))
}

proptest! {
    #[test]
    fn metrics_match_brute_force((gt, pred) in pixels()) {
        let cm = confusion(&label(8, 8, &gt), &label(8, 8, &pred)).unwrap();
        prop_assert_eq!(cm.total(), 64);
        let report = metrics(&cm);
        for c in 0..3u8 {
            let want = brute_force(&gt, &pred, c);
            let got = report.per_class[c as usize];
            prop_assert!(close(got.precision, want[0]));
            prop_assert!(close(got.recall, want[1]));
            prop_assert!(close(got.iou, want[2]));
        }
    }

    #[test]
    fn swapping_roles_swaps_precision_and_recall((gt, pred) in pixels()) {
        let a = confusion(&label(8, 8, &gt), &label(8, 8, &pred)).unwrap();
        let b = confusion(&label(8, 8, &pred), &label(8, 8, &gt)).unwrap();
        prop_assert_eq!(b, a.transpose());
        let (ma, mb) = (metrics(&a), metrics(&b));
        for c in 0..3 {
            prop_assert!(close(ma.per_class[c].precision, mb.per_class[c].recall));
            prop_assert!(close(ma.per_class[c].recall, mb.per_class[c].precision));
            prop_assert!(close(ma.per_class[c].iou, mb.per_class[c].iou));
        }
    }

    #[test]
    fn iou_is_bounded_by_precision_and_recall((gt, pred) in pixels()) {
        let report = metrics(&confusion(&label(8, 8, &gt), &label(8, 8, &pred)).unwrap());
        for m in report.per_class {
            if let (Some(p), Some(r), Some(i)) = (m.precision, m.recall, m.iou) {
                prop_assert!(i <= p.min(r) + 1e-9);
                prop_assert!((0.0..=100.0).contains(&i));
            }
        }
    }

    #[test]
    fn global_aggregation_equals_concatenation(images in prop::collection::vec(pixels(), 1..5)) {
        let scores: Vec<ImageScore> = images
            .iter()
            .enumerate()
            .map(|(i, (g, p))| {
                let cm = confusion(&label(8, 8, g), &label(8, 8, p)).unwrap();
                ImageScore { name: i.to_string(), confusion: cm, metrics: metrics(&cm) }
            })
            .collect();
        let (total, summary) = aggregate(&scores, Aggregation::Global);
        let gt: Vec<u8> = images.iter().flat_map(|(g, _)| g.clone()).collect();
        let pred: Vec<u8> = images.iter().flat_map(|(_, p)| p.clone()).collect();
        let whole = confusion(&label(8, 8 * images.len(), &gt), &label(8, 8 * images.len(), &pred)).unwrap();
        prop_assert_eq!(total, whole);
        prop_assert_eq!(summary, metrics(&whole));
    }
}

#[test]
fn hand_computed_matrix() {
    // Rows are ground truth, columns predictions.
    let cm = ConfusionMatrix::from_counts([[50, 10, 5], [5, 80, 5], [5, 5, 35]]);
    let r = metrics(&cm);
    let round = |v: Option<f64>| (v.unwrap() * 100.0).round() / 100.0;
    assert_eq!(round(r.class(LabelClass::Unknown).precision), 83.33);
    assert_eq!(round(r.class(LabelClass::Unknown).recall), 76.92);
    assert_eq!(round(r.class(LabelClass::Unknown).iou), 66.67);
    assert_eq!(round(r.class(LabelClass::Drivable).precision), 84.21);
    assert_eq!(round(r.class(LabelClass::Drivable).recall), 88.89);
    assert_eq!(round(r.class(LabelClass::Drivable).iou), 76.19);
    assert_eq!(round(r.class(LabelClass::Anomaly).precision), 77.78);
    assert_eq!(round(r.class(LabelClass::Anomaly).recall), 77.78);
    assert_eq!(round(r.class(LabelClass::Anomaly).iou), 63.64);
    assert_eq!(round(r.mean.iou), 68.83);
}

#[test]
fn absent_class_is_undefined_and_skipped() {
    let cm = ConfusionMatrix::from_counts([[3, 1, 0], [0, 4, 0], [0, 0, 0]]);
    let r = metrics(&cm);
    let anomaly = r.class(LabelClass::Anomaly);
    assert_eq!((anomaly.precision, anomaly.recall, anomaly.iou), (None, None, None));
    let unknown_iou = 75.0;
    let drivable_iou = 80.0;
    assert!((r.mean.iou.unwrap() - (unknown_iou + drivable_iou) / 2.0).abs() < 1e-9);
    let table = format_table(&r);
    assert!(table.contains('-'));
}

/// Published per-class scores and their "All" column, which must be the
/// arithmetic mean of the three class columns.
const PUBLISHED: [(&str, [f64; 12]); 10] = [
    ("SSLG", [89.62, 80.36, 75.09, 75.70, 86.92, 65.87, 33.15, 22.92, 16.03, 66.16, 63.40, 52.33]),
    ("FSL", [82.76, 91.52, 78.26, 88.19, 77.72, 75.22, 75.57, 64.94, 54.36, 82.17, 78.06, 69.28]),
    ("FML", [82.80, 99.86, 82.70, 99.60, 82.15, 81.82, 90.14, 77.22, 71.20, 90.85, 86.41, 78.57]),
    ("DSL", [78.25, 88.63, 79.12, 84.57, 78.97, 74.96, 65.11, 72.57, 48.93, 75.98, 80.06, 67.67]),
    ("DML", [79.58, 99.91, 79.52, 99.65, 79.48, 79.25, 86.76, 73.95, 66.45, 88.66, 84.45, 75.07]),
    ("RSL", [90.98, 86.81, 83.62, 83.86, 90.12, 82.70, 60.66, 71.89, 50.46, 78.50, 82.94, 72.26]),
    ("RML", [95.03, 94.71, 92.77, 95.84, 95.26, 92.14, 72.35, 85.49, 66.09, 87.74, 91.82, 83.67]),
    ("SSL", [83.92, 81.31, 69.20, 70.37, 75.97, 70.47, 61.92, 52.28, 42.91, 72.07, 69.85, 60.86]),
    ("SML", [96.97, 90.32, 80.30, 84.49, 99.37, 77.61, 80.91, 55.79, 50.42, 87.46, 81.83, 69.44]),
    ("MaM", [78.77, 87.91, 73.85, 87.40, 75.92, 71.62, 62.25, 68.84, 41.12, 76.14, 77.56, 62.20]),
];

#[test]
fn published_mean_column_is_class_average() {
    for (name, row) in PUBLISHED {
        for k in 0..3 {
            let mean = (row[k] + row[3 + k] + row[6 + k]) / 3.0;
            assert!((mean - row[9 + k]).abs() <= 0.01, "{name} column {k}: {mean} vs {}", row[9 + k]);
        }
    }
}

fn write_set(dir: &Path, frames: &[(&str, Vec<u8>)]) {
    std::fs::create_dir_all(dir).unwrap();
    for (name, values) in frames {
        write_label(&label(4, 4, values), &dir.join(format!("{name}.png"))).unwrap();
    }
}

fn frame(seed: u8) -> Vec<u8> {
    (0..16u8).map(|i| (i.wrapping_mul(7).wrapping_add(seed)) % 3).collect()
}

#[test]
fn identical_directories_score_perfectly() {
    let tmp = tempfile::tempdir().unwrap();
    let frames = [("a", frame(0)), ("b", frame(1)), ("c", frame(2))];
    write_set(&tmp.path().join("gt/label"), &frames);
    write_set(&tmp.path().join("pred"), &frames);
    let report = evaluate_dataset(&tmp.path().join("gt"), &tmp.path().join("pred"), Aggregation::Global).unwrap();
    assert!(report.is_complete());
    assert_eq!(report.images.len(), 3);
    for m in report.summary.per_class {
        assert_eq!((m.precision, m.recall, m.iou), (Some(100.0), Some(100.0), Some(100.0)));
    }
}

#[test]
fn dataset_split_matches_manual_sum() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = [("a", frame(0)), ("b", frame(1))];
    let pred = [("a", frame(1)), ("b", frame(1))];
    write_set(&tmp.path().join("gt"), &gt);
    write_set(&tmp.path().join("pred"), &pred);
    for agg in [Aggregation::Global, Aggregation::PerImage] {
        let report = evaluate_dataset(&tmp.path().join("gt"), &tmp.path().join("pred"), agg).unwrap();
        let a = confusion(&label(4, 4, &gt[0].1), &label(4, 4, &pred[0].1)).unwrap();
        let b = confusion(&label(4, 4, &gt[1].1), &label(4, 4, &pred[1].1)).unwrap();
        assert_eq!(report.confusion, [a, b].into_iter().sum());
        assert_eq!(report.confusion.total(), 32);
    }
}

#[test]
fn missing_prediction_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    write_set(&tmp.path().join("gt"), &[("a", frame(0)), ("b", frame(1))]);
    write_set(&tmp.path().join("pred"), &[("a", frame(0)), ("z", frame(2))]);
    let report = evaluate_dataset(&tmp.path().join("gt"), &tmp.path().join("pred"), Aggregation::Global).unwrap();
    assert!(!report.is_complete());
    assert_eq!(report.missing_predictions, vec!["b".to_string()]);
    assert_eq!(report.unmatched_predictions, vec!["z".to_string()]);
    assert_eq!(report.images.len(), 1);
}

#[test]
fn mismatched_sizes_are_failures() {
    let tmp = tempfile::tempdir().unwrap();
    write_set(&tmp.path().join("gt"), &[("a", frame(0))]);
    std::fs::create_dir_all(tmp.path().join("pred")).unwrap();
    write_label(&label(2, 2, &[0, 1, 2, 0]), &tmp.path().join("pred/a.png")).unwrap();
    let report = evaluate_dataset(&tmp.path().join("gt"), &tmp.path().join("pred"), Aggregation::Global).unwrap();
    assert_eq!(report.failures.len(), 1);
    assert!(!report.is_complete());
}
