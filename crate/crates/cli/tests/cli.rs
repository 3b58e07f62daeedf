use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dctfuse::harness::{make_split_focus_pair, synthetic_image};
use dctfuse::{read_image, write_image, DecisionMap, GrayImage, RefinedMap};

fn dctfuse(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dctfuse"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(
        s.trim_end().lines().count(),
        1,
        "diagnostic must be one line: {s:?}"
    );
    assert!(s.starts_with("error:"), "{s}");
    s
}

fn write_pair(dir: &Path) {
    let img = synthetic_image(4, 64, 32);
    let pair = make_split_focus_pair(&img, 5).unwrap();
    write_image(&pair.a, dir.join("a.pgm")).unwrap();
    write_image(&pair.b, dir.join("b.pgm")).unwrap();
    write_image(&img, dir.join("truth.pgm")).unwrap();
}

#[test]
fn fuse_with_defaults_and_map_dump() {
    let dir = tempfile::tempdir().unwrap();
    write_pair(dir.path());
    let out = dctfuse(
        &[
            "fuse",
            "--inputs",
            "a.pgm",
            "b.pgm",
            "--output",
            "f.pgm",
            "--dump-maps",
            "maps",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fused = read_image(dir.path().join("f.pgm")).unwrap();
    assert_eq!(fused, read_image(dir.path().join("truth.pgm")).unwrap());

    let decision =
        DecisionMap::from_text(&fs::read_to_string(dir.path().join("maps/decision.txt")).unwrap())
            .unwrap();
    let refined =
        RefinedMap::from_text(&fs::read_to_string(dir.path().join("maps/refined.txt")).unwrap())
            .unwrap();
    assert_eq!(decision.shape(), (4, 8));
    assert_eq!(refined.shape(), (4, 8));
    assert!(refined.get(1, 1) < 0 && refined.get(1, 6) > 0);
}

#[test]
fn fuse_three_inputs() {
    let dir = tempfile::tempdir().unwrap();
    write_pair(dir.path());
    let out = dctfuse(
        &[
            "fuse",
            "--inputs",
            "a.pgm",
            "b.pgm",
            "a.pgm",
            "--output",
            "f.pgm",
            "--no-cv",
            "--dump-maps",
            "m",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("m/selection.txt").exists());
}

#[test]
fn fuse_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_pair(dir.path());
    let one = dctfuse(
        &["fuse", "--inputs", "a.pgm", "--output", "f.pgm"],
        dir.path(),
    );
    assert_eq!(one.status.code(), Some(2));
    assert!(stderr_line(&one).contains("usage:"));

    let neg = dctfuse(
        &[
            "fuse",
            "--inputs",
            "a.pgm",
            "b.pgm",
            "--output",
            "f.pgm",
            "--threshold",
            "-1",
        ],
        dir.path(),
    );
    assert_eq!(neg.status.code(), Some(2));
    stderr_line(&neg);

    let bad_measure = dctfuse(
        &[
            "fuse",
            "--inputs",
            "a.pgm",
            "b.pgm",
            "--output",
            "f.pgm",
            "--measure",
            "dwt",
        ],
        dir.path(),
    );
    assert_eq!(bad_measure.status.code(), Some(2));
    stderr_line(&bad_measure);

    let none = dctfuse(&[], dir.path());
    assert_eq!(none.status.code(), Some(2));
    stderr_line(&none);
}

#[test]
fn fuse_dimension_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    write_pair(dir.path());
    let mut bytes = b"P5\n100 100\n255\n".to_vec();
    bytes.extend(vec![9u8; 10_000]);
    fs::write(dir.path().join("odd.pgm"), bytes).unwrap();

    let out = dctfuse(
        &["fuse", "--inputs", "odd.pgm", "a.pgm", "--output", "f.pgm"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_line(&out).contains("odd.pgm"));

    write_image(
        &GrayImage::filled(32, 32, 1.0),
        dir.path().join("small.pgm"),
    )
    .unwrap();
    let out = dctfuse(
        &[
            "fuse",
            "--inputs",
            "a.pgm",
            "small.pgm",
            "--output",
            "f.pgm",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_line(&out).contains("small.pgm"));

    let out = dctfuse(
        &[
            "fuse",
            "--inputs",
            "a.pgm",
            "missing.pgm",
            "--output",
            "f.pgm",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    stderr_line(&out);

    fs::write(dir.path().join("ascii.pgm"), "P2\n8 8\n255\n0\n").unwrap();
    let out = dctfuse(
        &[
            "fuse",
            "--inputs",
            "a.pgm",
            "ascii.pgm",
            "--output",
            "f.pgm",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_line(&out).contains("P2"));
}

#[test]
fn eval_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_pair(dir.path());
    let out = dctfuse(
        &["eval", "--fused", "truth.pgm", "--ref", "truth.pgm"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "metric,value\nssim,1.0\n"
    );

    let out = dctfuse(
        &[
            "eval",
            "--fused",
            "truth.pgm",
            "--sources",
            "a.pgm",
            "b.pgm",
        ],
        dir.path(),
    );
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let metrics: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(metrics, vec!["mi", "qabf"]);

    let out = dctfuse(&["eval", "--fused", "truth.pgm"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);

    let out = dctfuse(
        &["eval", "--fused", "nope.pgm", "--ref", "truth.pgm"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    stderr_line(&out);
}

#[test]
fn gen_dataset_layouts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dctfuse(
        &[
            "gen-dataset",
            "--synthetic",
            "2",
            "--size",
            "64",
            "--radii",
            "5",
            "--out",
            "ds",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let mut names: Vec<String> = fs::read_dir(dir.path().join("ds"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "synthetic00_r5_A.pgm",
            "synthetic00_r5_B.pgm",
            "synthetic00_r5_truth.pgm",
            "synthetic01_r5_A.pgm",
            "synthetic01_r5_B.pgm",
            "synthetic01_r5_truth.pgm"
        ]
    );

    // user-supplied images
    fs::create_dir(dir.path().join("src")).unwrap();
    for i in 0..6 {
        write_image(
            &synthetic_image(50 + i, 32, 16),
            dir.path().join(format!("src/img{i}.pgm")),
        )
        .unwrap();
    }
    let out = dctfuse(
        &[
            "gen-dataset",
            "--images",
            "src",
            "--radii",
            "5,7,9",
            "--out",
            "ds2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let truths = fs::read_dir(dir.path().join("ds2"))
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .ends_with("_truth.pgm")
        })
        .count();
    assert_eq!(truths, 18);

    fs::create_dir(dir.path().join("empty")).unwrap();
    let out = dctfuse(
        &["gen-dataset", "--images", "empty", "--out", "ds3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);
}

#[test]
fn bench_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dctfuse(
        &[
            "gen-dataset",
            "--synthetic",
            "1",
            "--size",
            "64",
            "--radii",
            "5,7",
            "--out",
            "ds",
        ],
        dir.path(),
    );
    assert!(gen.status.success());
    let out = dctfuse(&["bench", "--dataset", "ds", "--repeat", "2"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "image,radius,method,ssim,us_per_block");
    // 2 radii x 4 methods + 4 summary rows
    assert_eq!(lines.len(), 1 + 8 + 4);
    for l in &lines[1..] {
        let us: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(us > 0.0, "{l}");
    }

    let out = dctfuse(&["bench", "--dataset", "ds", "--repeat", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = dctfuse(&["bench", "--dataset", "nowhere"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    stderr_line(&out);
}
