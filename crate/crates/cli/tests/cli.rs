use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn autolabel(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autolabel"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .expect("binary runs")
}

fn scene_template() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config/scene.toml")
}

/// Renders `count` frames into `dir` and returns the matching label config.
fn synth(dir: &Path, count: usize, seed: u64) -> PathBuf {
    let out = autolabel(&[&"synth", &scene_template(), &dir, &"-n", &count.to_string(), &"-s", &seed.to_string()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("config.toml")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn strip_timings(mut v: serde_json::Value) -> serde_json::Value {
    for frame in v["frames"].as_array_mut().unwrap() {
        frame.as_object_mut().unwrap().remove("timings_ms");
    }
    v
}

#[test]
fn labels_every_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let cfg = synth(&data, 3, 1);
    let out_dir = tmp.path().join("out");
    let out = autolabel(&[&"label", &data, &out_dir, &"-c", &cfg, &"--dump-viz", &"--dump-depth-maps"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out_dir);
    let frames = m["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 3);
    for f in frames {
        assert_eq!(f["status"], "ok");
        let name = f["name"].as_str().unwrap();
        assert!(out_dir.join("label").join(format!("{name}.png")).is_file());
        assert!(out_dir.join("viz").read_dir().unwrap().count() > 0);
        assert!(out_dir.join("depth_maps").join(format!("{name}_d_f.png")).is_file());
    }
}

#[test]
fn corrupt_frame_does_not_stop_the_batch() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let cfg = synth(&data, 3, 2);
    fs::write(data.join("depth/scene_00001.png"), b"garbage").unwrap();
    let out_dir = tmp.path().join("out");
    let out = autolabel(&[&"label", &data, &out_dir, &"-c", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let m = manifest(&out_dir);
    let statuses: Vec<_> = m["frames"].as_array().unwrap().iter().map(|f| f["status"].clone()).collect();
    assert_eq!(statuses, ["ok", "error", "ok"]);
    assert!(out_dir.join("label/scene_00000.png").is_file());
    assert!(out_dir.join("label/scene_00002.png").is_file());
    assert!(!out_dir.join("label/scene_00001.png").exists());
}

#[test]
fn missing_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, 1, 0);
    let out = autolabel(&[&"label", &data, &tmp.path().join("out"), &"-c", &tmp.path().join("none.toml")]);
    assert_eq!(out.status.code(), Some(2));
    let out = autolabel(&[&"label", &data, &tmp.path().join("out"), &"-c", &data.join("config.toml"), &"-j", &"0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluates_identical_sets_as_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, 2, 3);
    let report = tmp.path().join("report.txt");
    let out = autolabel(&[&"eval", &data, &data.join("label"), &"-r", &report]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report.with_extension("json")).unwrap()).unwrap();
    for c in json["summary"]["per_class"].as_array().unwrap() {
        assert_eq!(c["iou"], 100.0);
    }
    assert!(fs::read_to_string(&report).unwrap().contains("100.00"));
}

#[test]
fn missing_prediction_fails_evaluation() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data, 2, 3);
    let pred = tmp.path().join("pred");
    fs::create_dir_all(&pred).unwrap();
    fs::copy(data.join("label/scene_00000.png"), pred.join("scene_00000.png")).unwrap();
    let out = autolabel(&[&"eval", &data, &pred]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn synthesis_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    synth(&a, 2, 42);
    synth(&b, 2, 42);
    for sub in ["rgb", "depth", "label"] {
        for name in ["scene_00000.png", "scene_00001.png"] {
            assert_eq!(fs::read(a.join(sub).join(name)).unwrap(), fs::read(b.join(sub).join(name)).unwrap());
        }
    }
}

#[test]
fn synthesis_writes_requested_count() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("set");
    synth(&dir, 10, 5);
    for sub in ["rgb", "depth", "label"] {
        assert_eq!(fs::read_dir(dir.join(sub)).unwrap().count(), 10);
    }
}

#[test]
fn invalid_scene_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scene_template()).unwrap().replace("m = 1.0", "m = -1.0");
    assert!(text.contains("m = -1.0"));
    let spec = tmp.path().join("bad.toml");
    fs::write(&spec, text).unwrap();
    let out = autolabel(&[&"synth", &spec, &tmp.path().join("out")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn manifest_is_deterministic_apart_from_timings() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let cfg = synth(&data, 3, 9);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, jobs) in [(&a, "1"), (&b, "2")] {
        let out = autolabel(&[&"label", &data, dir, &"-c", &cfg, &"-j", &jobs]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(strip_timings(manifest(&a)), strip_timings(manifest(&b)));
    for i in 0..3 {
        let name = format!("label/scene_{i:05}.png");
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}
