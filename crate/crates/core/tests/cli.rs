mod common;

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use autobox::annotations::{write_voc_xml, ImageAnnotation, LabeledBox};
use autobox::geometry::{BBox, ImageDims};

use common::{autobox, stdout_json, synth};

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_voc(dir: &Path, id: &str, boxes: &[(f64, f64, f64, f64)]) {
    fs::create_dir_all(dir).unwrap();
    let mut a = ImageAnnotation::new(id, ImageDims::new(100, 100).unwrap()).with_boxes(
        boxes
            .iter()
            .map(|&(x0, y0, x1, y1)| {
                LabeledBox::new(BBox::new(x0, y0, x1, y1).unwrap(), "mug").unwrap()
            })
            .collect(),
    );
    a.file_name = Some(format!("{id}.jpg"));
    fs::write(dir.join(format!("{id}.xml")), write_voc_xml(&a)).unwrap();
}

fn stderr_json(out: &std::process::Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let last = text.lines().last().expect("stderr line");
    serde_json::from_str(last).expect("stderr error is JSON")
}

#[test]
fn help_lists_defaults() {
    let out = autobox(["annotate", "--help"]);
    assert!(out.status.success());
    let help = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "--slack <N>",
        "[default: 0]",
        "[default: 0.5]",
        "[default: voc]",
        "[default: FFFFFF]",
        "[default: 40]",
        "[default: 64]",
        "[default: 8]",
        "--no-merge",
    ] {
        assert!(help.contains(needle), "missing {needle} in:\n{help}");
    }
    let split = String::from_utf8_lossy(&autobox(["split", "--help"]).stdout).into_owned();
    assert!(split.contains("[default: 0.9]") && split.contains("[default: 0]"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(autobox(["annotate", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        autobox(["split", "--ids", "x", "--ratio", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        autobox(["split", "--ids", "x", "--ratio", "0"])
            .status
            .code(),
        Some(2)
    );
    let both = [
        "annotate",
        "--detections",
        "d",
        "--baseline",
        "--images",
        "i",
        "--label",
        "x",
        "--out",
        "o",
    ];
    assert_eq!(autobox(both).status.code(), Some(2));
    assert_eq!(
        autobox([
            "annotate",
            "--detections",
            "d",
            "--label",
            "x",
            "--out",
            "o",
            "--connectivity",
            "6"
        ])
        .status
        .code(),
        Some(2)
    );
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    write_voc(&gt, "a", &[(0.0, 0.0, 10.0, 10.0)]);
    // hit_iou must stay below the match threshold
    let out = autobox([
        "evaluate",
        "--pred",
        p(&gt),
        "--gt",
        p(&gt),
        "--iou",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");
}

#[test]
fn malformed_stream_is_a_data_error_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let stream = tmp.path().join("d.jsonl");
    let good = r#"{"schema_version":1,"image":{"id":"a","width":10,"height":10},"detections":[]}"#;
    fs::write(&stream, format!("{good}\n\n{{\"schema_version\":1}}\n")).unwrap();
    let out = autobox([
        "annotate",
        "--detections",
        p(&stream),
        "--label",
        "mug",
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "schema");
    assert!(err["message"].as_str().unwrap().contains("line 3"), "{err}");
}

#[test]
fn ground_truth_against_itself_is_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    write_voc(&gt, "a", &[(10.0, 10.0, 50.0, 50.0)]);
    write_voc(
        &gt,
        "b",
        &[(0.0, 0.0, 30.0, 20.0), (60.0, 60.0, 90.0, 95.0)],
    );
    let report_path = tmp.path().join("report.json");
    let r = stdout_json(&autobox([
        "evaluate",
        "--pred",
        p(&gt),
        "--gt",
        p(&gt),
        "--out",
        p(&report_path),
    ]));
    assert_eq!(r["map"], 1.0);
    assert_eq!(r["precision"], 1.0);
    assert_eq!(r["recall"], 1.0);
    assert_eq!(r["counts"], serde_json::json!({"tp": 3, "fp": 0, "fn": 0}));
    assert!(r.get("categories").is_none());
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(saved, r);
}

#[test]
fn scored_stream_gives_half_ap() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    write_voc(&gt, "i1", &[(10.0, 10.0, 50.0, 50.0)]);
    write_voc(&gt, "i2", &[(50.0, 50.0, 90.0, 90.0)]);
    let stream = tmp.path().join("pred.jsonl");
    fs::write(
        &stream,
        concat!(
            r#"{"schema_version":1,"image":{"id":"i1","width":100,"height":100},"detections":[{"bbox":[10,10,50,50],"score":0.9,"label":"mug"}]}"#,
            "\n",
            r#"{"schema_version":1,"image":{"id":"i2","width":100,"height":100},"detections":[{"bbox":[0,0,20,20],"score":0.8,"label":"mug"}]}"#,
            "\n"
        ),
    )
    .unwrap();
    let r = stdout_json(&autobox([
        "evaluate",
        "--pred",
        p(&stream),
        "--gt",
        p(&gt),
        "--categorize",
    ]));
    assert_eq!(r["map"], 0.5);
    assert_eq!(r["per_class_ap"]["mug"], 0.5);
    assert_eq!(r["categories"]["correct"], 1);
    assert_eq!(r["categories"]["not_detected"], 1);
    assert_eq!(r["categories"]["background_boxes"], 1);
}

#[test]
fn missing_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt");
    write_voc(&gt, "a", &[(10.0, 10.0, 50.0, 50.0)]);
    let empty = tmp.path().join("empty");
    fs::create_dir_all(&empty).unwrap();

    let out = autobox(["evaluate", "--pred", p(&empty), "--gt", p(&gt)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "id_mismatch");

    let r = stdout_json(&autobox([
        "evaluate",
        "--pred",
        p(&empty),
        "--gt",
        p(&gt),
        "--missing-as-empty",
    ]));
    assert_eq!(r["map"], 0.0);
    assert_eq!(r["counts"]["fn"], 1);
}

#[test]
fn split_cli_counts_and_repeatability() {
    let tmp = tempfile::tempdir().unwrap();
    let ids = tmp.path().join("ids.txt");
    fs::write(
        &ids,
        (0..330).map(|i| format!("f{i}\n")).collect::<String>(),
    )
    .unwrap();
    let run = |seed: &str, out: &str| {
        let dir = tmp.path().join(out);
        let s = stdout_json(&autobox([
            "split",
            "--ids",
            p(&ids),
            "--seed",
            seed,
            "--out",
            p(&dir),
        ]));
        assert_eq!(
            (s["train"].as_u64(), s["val"].as_u64()),
            (Some(297), Some(33))
        );
        fs::read_to_string(dir.join("val.txt")).unwrap()
    };
    assert_eq!(run("3", "a"), run("3", "b"));
    assert_ne!(run("3", "c"), run("4", "d"));
}

#[test]
fn split_from_directory_stems() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("imgs");
    fs::create_dir_all(&dir).unwrap();
    for i in 0..10 {
        fs::write(dir.join(format!("im{i}.ppm")), b"").unwrap();
        fs::write(dir.join(format!("im{i}.xml")), b"").unwrap();
    }
    let s = stdout_json(&autobox([
        "split",
        "--dir",
        p(&dir),
        "--ratio",
        "0.8",
        "--out",
        p(&tmp.path().join("o")),
    ]));
    assert_eq!((s["train"].as_u64(), s["val"].as_u64()), (Some(8), Some(2)));
}

#[test]
fn convert_round_trip_through_coco_and_yolo() {
    let tmp = tempfile::tempdir().unwrap();
    let voc = tmp.path().join("voc");
    write_voc(&voc, "a", &[(10.0, 10.0, 50.0, 50.0)]);
    write_voc(&voc, "b", &[(0.0, 0.0, 30.0, 20.0)]);

    let coco = tmp.path().join("coco");
    stdout_json(&autobox([
        "convert",
        "--input",
        p(&voc),
        "--from",
        "voc",
        "--to",
        "coco",
        "--out",
        p(&coco),
    ]));
    let back = tmp.path().join("back");
    stdout_json(&autobox([
        "convert",
        "--input",
        p(&coco.join("annotations.json")),
        "--from",
        "coco",
        "--to",
        "voc",
        "--out",
        p(&back),
    ]));
    for id in ["a", "b"] {
        assert_eq!(
            fs::read(voc.join(format!("{id}.xml"))).unwrap(),
            fs::read(back.join(format!("{id}.xml"))).unwrap()
        );
    }

    let yolo = tmp.path().join("yolo");
    stdout_json(&autobox([
        "convert",
        "--input",
        p(&voc),
        "--from",
        "voc",
        "--to",
        "yolo",
        "--out",
        p(&yolo),
    ]));
    assert_eq!(
        fs::read_to_string(yolo.join("classes.txt")).unwrap(),
        "mug\n"
    );
    assert_eq!(
        fs::read_to_string(yolo.join("a.txt")).unwrap(),
        "0 0.300000 0.300000 0.400000 0.400000\n"
    );

    // YOLO has no image sizes
    let again = tmp.path().join("again");
    let out = autobox([
        "convert",
        "--input",
        p(&yolo),
        "--from",
        "yolo",
        "--to",
        "voc",
        "--out",
        p(&again),
    ]);
    assert_eq!(out.status.code(), Some(1));
    stdout_json(&autobox([
        "convert",
        "--input",
        p(&yolo),
        "--from",
        "yolo",
        "--to",
        "voc",
        "--dims",
        "100x100",
        "--out",
        p(&again),
    ]));
    let r = stdout_json(&autobox(["evaluate", "--pred", p(&again), "--gt", p(&voc)]));
    assert_eq!(r["map"], 1.0);
}

#[test]
fn baseline_with_estimated_background() {
    let tmp = tempfile::tempdir().unwrap();
    let images = tmp.path().join("images");
    let gt = tmp.path().join("gt");
    fs::create_dir_all(&images).unwrap();
    fs::create_dir_all(&gt).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let backgrounds = [[30, 120, 40], [200, 190, 170], [90, 90, 200]];
    for (k, bg) in backgrounds.iter().enumerate() {
        let s = synth::scene(&mut rng, 160, 140, *bg, 6);
        let id = format!("c{k}");
        fs::write(images.join(format!("{id}.ppm")), s.to_ppm()).unwrap();
        let mut a = ImageAnnotation::new(id.as_str(), ImageDims::new(s.width, s.height).unwrap())
            .with_boxes(vec![LabeledBox::new(
                BBox::new(s.bbox[0], s.bbox[1], s.bbox[2], s.bbox[3]).unwrap(),
                "mug",
            )
            .unwrap()]);
        a.file_name = Some(format!("{id}.ppm"));
        fs::write(gt.join(format!("{id}.xml")), write_voc_xml(&a)).unwrap();
    }
    let out = tmp.path().join("ann");
    let s = stdout_json(&autobox([
        "annotate",
        "--baseline",
        "--images",
        p(&images),
        "--auto-bg",
        "3",
        "--label",
        "mug",
        "--format",
        "coco",
        "--out",
        p(&out),
    ]));
    assert_eq!(s["annotated"], 3);
    let r = stdout_json(&autobox([
        "evaluate",
        "--pred",
        p(&out),
        "--pred-format",
        "coco",
        "--gt",
        p(&gt),
        "--categorize",
    ]));
    assert_eq!(r["map"], 1.0);
    assert_eq!(r["categories"]["correct"], 3);
}

#[test]
fn images_below_threshold_are_reported_not_written() {
    let tmp = tempfile::tempdir().unwrap();
    let stream = tmp.path().join("d.jsonl");
    fs::write(
        &stream,
        concat!(
            r#"{"schema_version":1,"image":{"id":"hi","width":50,"height":50},"detections":[{"bbox":[1,1,20,20],"score":0.9,"label":"object"}]}"#,
            "\n",
            r#"{"schema_version":1,"image":{"id":"lo","width":50,"height":50},"detections":[{"bbox":[1,1,20,20],"score":0.2,"label":"object"}]}"#,
            "\n"
        ),
    )
    .unwrap();
    let out = tmp.path().join("o");
    let s = stdout_json(&autobox([
        "annotate",
        "--detections",
        p(&stream),
        "--label",
        "mug",
        "--format",
        "yolo",
        "--out",
        p(&out),
    ]));
    assert_eq!(
        s,
        serde_json::json!({"annotated": 1, "no_detection": 1, "no_detection_ids": ["lo"]})
    );
    assert!(out.join("hi.txt").exists());
    assert!(!out.join("lo.txt").exists());

    let s = stdout_json(&autobox([
        "annotate",
        "--detections",
        p(&stream),
        "--label",
        "mug",
        "--score-threshold",
        "0.1",
        "--out",
        p(&out),
    ]));
    assert_eq!(s["annotated"], 2);
}
