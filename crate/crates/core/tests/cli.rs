mod common;

use std::path::Path;
use std::process::Command;

use dentobox::cli::{self, EXIT_INVARIANT, EXIT_IO, EXIT_OK, EXIT_PAIRING};
use dentobox::labelmap::{read_labelmap, write_labelmap, LabelMap};
use dentobox::metrics::{evaluate, MetricReport};
use dentobox::obb::{export_obbs, import_obbs};
use dentobox::postprocess::postprocess;

use common::tooth_row;

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["dentobox"];
    full.extend_from_slice(args);
    cli::run(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ground truth plus a prediction with a stray duplicate of label 8.
fn pair() -> (LabelMap, LabelMap) {
    let gt = tooth_row(&[6, 7, 8, 9, 10, 11]);
    let mut pred = gt.clone();
    for y in 0..3 {
        pred.set(45, y, 8);
        pred.set(46, y, 8);
    }
    for y in 3..17 {
        pred.set(26, y, 0);
    }
    (pred, gt)
}

fn write_pairs(root: &Path, names: &[&str]) {
    std::fs::create_dir_all(root.join("pred")).unwrap();
    std::fs::create_dir_all(root.join("gt")).unwrap();
    let (pred, gt) = pair();
    for n in names {
        write_labelmap(&root.join("pred").join(format!("{n}.png")), &pred).unwrap();
        write_labelmap(&root.join("gt").join(format!("{n}.png")), &gt).unwrap();
    }
}

#[test]
fn empty_directory_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["postprocess", s(&input), s(&out)]), EXIT_OK);
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 0);
    assert_eq!(run(&["obb", s(&input), "--out", s(&out)]), EXIT_OK);
}

#[test]
fn corrupt_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.png");
    std::fs::write(&bad, b"not a png").unwrap();
    assert_eq!(
        run(&["postprocess", s(&bad), s(&dir.path().join("o.png"))]),
        EXIT_IO
    );
    let missing = dir.path().join("nope");
    assert_eq!(
        run(&["obb", s(&missing), "--out", s(&dir.path().join("o"))]),
        EXIT_IO
    );
}

#[test]
fn out_of_range_label_is_an_invariant_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("high.pgm");
    std::fs::write(&f, "P2\n2 1\n255\n1 40\n").unwrap();
    assert_eq!(
        run(&["obb", s(&f), "--out", s(&dir.path().join("o.json"))]),
        EXIT_INVARIANT
    );
}

#[test]
fn bad_flags_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("m.png");
    write_labelmap(&f, &pair().1).unwrap();
    let o = dir.path().join("p");
    assert_eq!(
        run(&[
            "--overlap",
            "20",
            "--patch-size",
            "8",
            "patchify",
            s(&f),
            "--out",
            s(&o)
        ]),
        EXIT_INVARIANT
    );
    assert_eq!(
        run(&["--focal-alpha", "1.5", "obb", s(&f), "--out", s(&o)]),
        EXIT_INVARIANT
    );
}

#[test]
fn orphans_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    write_pairs(dir.path(), &["a", "b"]);
    std::fs::remove_file(dir.path().join("gt/b.png")).unwrap();
    let code = run(&[
        "eval",
        "--pred",
        s(&dir.path().join("pred")),
        "--gt",
        s(&dir.path().join("gt")),
        "--out",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(code, EXIT_PAIRING);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_dentobox");
    let bad = dir.path().join("bad.pgm");
    std::fs::write(&bad, "P5 nonsense").unwrap();
    let status = Command::new(bin)
        .args(["obb", s(&bad), "--out", s(&dir.path().join("o.json"))])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_IO));
    let out = Command::new(bin).arg("demo-attention").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("alpha mean"));
}

#[test]
fn postprocess_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let (pred, _) = pair();
    let input = dir.path().join("scan.pgm");
    write_labelmap(&input, &pred).unwrap();
    let out = dir.path().join("clean.pgm");
    assert_eq!(run(&["postprocess", s(&input), s(&out)]), EXIT_OK);
    let expected = postprocess(&pred);
    assert_eq!(read_labelmap(&out).unwrap(), expected.map);
    let log = std::fs::read_to_string(dir.path().join("clean.changes.json")).unwrap();
    let changes: Vec<dentobox::postprocess::ChangeRecord> = serde_json::from_str(&log).unwrap();
    assert_eq!(changes, expected.changes);
    assert_eq!(changes.len(), 1);
}

#[test]
fn obb_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("maps");
    std::fs::create_dir(&input).unwrap();
    let (pred, gt) = pair();
    write_labelmap(&input.join("p.png"), &pred).unwrap();
    write_labelmap(&input.join("g.png"), &gt).unwrap();
    let out = dir.path().join("boxes");
    assert_eq!(
        run(&["--jobs", "2", "obb", s(&input), "--out", s(&out)]),
        EXIT_OK
    );
    let got = std::fs::read_to_string(out.join("p.json")).unwrap();
    let expected = export_obbs("p", &cli::boxes_for_image("p", &pred)).unwrap();
    assert_eq!(got, expected);
    assert_eq!(import_obbs(&got).unwrap().teeth.len(), 6);
}

#[test]
fn eval_matches_library_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_pairs(dir.path(), &["x1", "x2", "x3"]);
    let eval = |out: &str, jobs: &str| {
        run(&[
            "--jobs",
            jobs,
            "eval",
            "--pred",
            s(&dir.path().join("pred")),
            "--gt",
            s(&dir.path().join("gt")),
            "--out",
            s(&dir.path().join(out)),
        ])
    };
    assert_eq!(eval("o1", "1"), EXIT_OK);
    assert_eq!(eval("o2", "4"), EXIT_OK);
    for f in ["per_label.csv", "summary.json", "radar.csv"] {
        let a = std::fs::read(dir.path().join("o1").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("o2").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }

    let (pred, gt) = pair();
    let one = evaluate(
        &pred,
        &gt,
        &cli::boxes_for_image("x", &pred),
        &cli::boxes_for_image("x", &gt),
    )
    .unwrap();
    let pooled = MetricReport::merge([&one, &one, &one]);
    let csv = String::from_utf8(cli::per_label_csv(&pooled).unwrap()).unwrap();
    assert_eq!(
        std::fs::read_to_string(dir.path().join("o1/per_label.csv")).unwrap(),
        csv
    );

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o1/summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["images"], 3);
    assert_eq!(summary["missing"]["fp"], 0);
    assert_eq!(summary["missing"]["fn"], 0);
    assert_eq!(summary["categories"].as_array().unwrap().len(), 8);
    let radar = std::fs::read_to_string(dir.path().join("o1/radar.csv")).unwrap();
    assert_eq!(radar.lines().count(), 33);
}

#[test]
fn eval_with_box_directories() {
    let dir = tempfile::tempdir().unwrap();
    write_pairs(dir.path(), &["k"]);
    let root = dir.path();
    for side in ["pred", "gt"] {
        let code = run(&[
            "obb",
            s(&root.join(side)),
            "--out",
            s(&root.join(format!("{side}_obb"))),
        ]);
        assert_eq!(code, EXIT_OK);
    }
    let args = |out: &str| {
        vec![
            "eval".to_string(),
            "--pred".into(),
            s(&root.join("pred")).into(),
            "--gt".into(),
            s(&root.join("gt")).into(),
            "--out".into(),
            s(&root.join(out)).into(),
            "--pred-obb".into(),
            s(&root.join("pred_obb")).into(),
            "--gt-obb".into(),
            s(&root.join("gt_obb")).into(),
        ]
    };
    let mut full = vec!["dentobox".to_string()];
    full.extend(args("with_boxes"));
    assert_eq!(cli::run(full), EXIT_OK);
    let radar = std::fs::read_to_string(root.join("with_boxes/radar.csv")).unwrap();
    assert!(radar.lines().any(|l| l.starts_with("8,")));

    std::fs::remove_file(root.join("gt_obb/k.json")).unwrap();
    let mut full = vec!["dentobox".to_string()];
    full.extend(args("again"));
    assert_eq!(cli::run(full), EXIT_PAIRING);
}

#[test]
fn patchify_then_stitch() {
    let dir = tempfile::tempdir().unwrap();
    let mut map = LabelMap::background(61, 37).unwrap();
    for y in 0..37 {
        for x in 0..61 {
            map.set(x, y, ((x + 3 * y) % 33) as u8);
        }
    }
    let input = dir.path().join("big.png");
    write_labelmap(&input, &map).unwrap();
    let tiles = dir.path().join("tiles");
    let code = run(&[
        "--patch-size",
        "16",
        "--overlap",
        "3",
        "patchify",
        s(&input),
        "--out",
        s(&tiles),
    ]);
    assert_eq!(code, EXIT_OK);
    let manifest = tiles.join("big.patches.json");
    let back = dir.path().join("back.png");
    assert_eq!(run(&["stitch", s(&manifest), s(&back)]), EXIT_OK);
    assert_eq!(read_labelmap(&back).unwrap(), map);
}

#[test]
fn identical_inputs_score_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    write_pairs(dir.path(), &["same"]);
    let gt = dir.path().join("gt");
    let out = dir.path().join("out");
    assert_eq!(
        run(&["eval", "--pred", s(&gt), "--gt", s(&gt), "--out", s(&out)]),
        EXIT_OK
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    for key in ["precision", "recall", "dsc", "iou", "riou"] {
        assert_eq!(summary["overall"][key], 100.0, "{key}");
    }
    assert_eq!(summary["missing"]["fp"], 0);
    assert_eq!(summary["missing"]["fn"], 0);
}
