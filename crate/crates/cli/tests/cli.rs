use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chartextract_core::eval::EvalReport;
use chartextract_core::io::{parse_detections, serialize_detections};
use chartextract_core::series::parse_series_json;
use chartextract_core::{DetectionSet, Record};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chartextract"))
        .args(args)
        .env_remove("CHARTEXTRACT_JOBS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus(dir: &Path, types: &str, count: &str) -> PathBuf {
    let out = dir.join("corpus");
    let o = run(&[
        "generate",
        "--seed",
        "7",
        "--count",
        count,
        "--types",
        types,
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn generate_writes_files_and_manifest() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("new/nested");
    let o = run(&[
        "generate",
        "--seed",
        "7",
        "--count",
        "5",
        "--types",
        "bar",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap().trim(),
        s(&out.join("manifest.json"))
    );
    assert_eq!(fs::read_dir(out.join("images")).unwrap().count(), 5);
    assert_eq!(fs::read_dir(out.join("gt")).unwrap().count(), 10);
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let t = tempfile::tempdir().unwrap();
    let o = run(&["generate", "--types", "pie", "--out", s(t.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--types"));

    let o = run(&["generate", "--count", "0", "--out", s(t.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--count"));

    let o = run(&["detect", "--out", s(t.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--corpus"));

    let o = run(&["--jobs", "0", "generate", "--out", s(t.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--jobs"));
}

#[test]
fn jobs_env_var_is_validated() {
    let t = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_chartextract"))
        .args(["generate", "--count", "2", "--out", s(t.path())])
        .env("CHARTEXTRACT_JOBS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_chartextract"))
        .args(["generate", "--count", "2", "--out", s(t.path())])
        .env("CHARTEXTRACT_JOBS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn cc_bars_on_bar_chart_with_overlay() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "bar", "2");
    let (det, ov) = (t.path().join("det"), t.path().join("ov"));
    let o = run(&[
        "detect",
        "--corpus",
        s(&c),
        "--detector",
        "cc-bars",
        "--out",
        s(&det),
        "--overlay",
        s(&ov),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = parse_detections(&fs::read(det.join("bar-vertical-0000.detections.json")).unwrap())
        .unwrap();
    assert!(!d.is_empty());
    assert!(ov.join("bar-vertical-0000.overlay.png").is_file());
}

#[test]
fn detector_kind_mismatch_exits_2() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "scatter", "1");
    let o = run(&[
        "detect",
        "--corpus",
        s(&c),
        "--detector",
        "cc-bars",
        "--out",
        s(&t.path().join("d")),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--detector"));

    // box detections handed to the external-file detector for a scatter chart
    let ext = t.path().join("ext");
    fs::create_dir_all(&ext).unwrap();
    let boxes = DetectionSet::boxes("scatter-0000", vec![]);
    fs::write(
        ext.join("scatter-0000.detections.json"),
        serialize_detections(&boxes).unwrap(),
    )
    .unwrap();
    let o = run(&[
        "detect",
        "--corpus",
        s(&c),
        "--detector",
        "external-file",
        "--input",
        s(&ext),
        "--out",
        s(&t.path().join("d")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn external_file_reemits_canonical_form() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "scatter", "1");
    let ext = t.path().join("ext");
    fs::create_dir_all(&ext).unwrap();
    // same content, different whitespace
    let gt = fs::read_to_string(c.join("gt/scatter-0000.detections.json")).unwrap();
    let squashed: String = gt.split_whitespace().collect::<Vec<_>>().join(" ");
    fs::write(ext.join("scatter-0000.detections.json"), squashed).unwrap();
    let out = t.path().join("d");
    let o = run(&[
        "detect",
        "--corpus",
        s(&c),
        "--detector",
        "external-file",
        "--input",
        s(&ext),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(out.join("scatter-0000.detections.json")).unwrap(),
        gt
    );
}

#[test]
fn external_heatmap_png_is_decoded() {
    use chartextract_core::heatmap::{self, GaussianParams};
    use chartextract_core::raster::encode_image;
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "scatter", "1");
    let gt =
        parse_detections(&fs::read(c.join("gt/scatter-0000.detections.json")).unwrap()).unwrap();
    let png = chartextract_core::raster::decode_image(
        &fs::read(c.join("images/scatter-0000.png")).unwrap(),
    )
    .unwrap();
    let h = heatmap::encode(
        &gt.point_items(),
        png.width(),
        png.height(),
        &GaussianParams::default(),
    )
    .unwrap();
    let ext = t.path().join("ext");
    fs::create_dir_all(&ext).unwrap();
    fs::write(
        ext.join("scatter-0000.heatmap.png"),
        encode_image(&h.to_image()).unwrap(),
    )
    .unwrap();
    let out = t.path().join("d");
    let o = run(&[
        "detect",
        "--corpus",
        s(&c),
        "--detector",
        "external-file",
        "--input",
        s(&ext),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let got =
        parse_detections(&fs::read(out.join("scatter-0000.detections.json")).unwrap()).unwrap();
    assert_eq!(got.len(), gt.len());
}

#[test]
fn convert_gt_detections_within_half_percent() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "bar", "3");
    let out = t.path().join("series");
    let o = run(&[
        "convert",
        "--corpus",
        s(&c),
        "--detections",
        s(&c.join("gt")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for i in 0..3 {
        let name = format!("bar-vertical-{i:04}.series.json");
        let got = parse_series_json(&fs::read(out.join(&name)).unwrap()).unwrap();
        let want = parse_series_json(&fs::read(c.join("gt").join(&name)).unwrap()).unwrap();
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.name(), w.name());
            for (a, b) in g.records().iter().zip(w.records()) {
                let (Record::Categorical { value: va, .. }, Record::Categorical { value: vb, .. }) =
                    (a, b)
                else {
                    panic!("{a:?}");
                };
                assert!((va - vb).abs() <= 0.005 * vb.abs());
            }
        }
    }
}

#[test]
fn convert_without_legend_gives_one_series() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "scatter", "4");
    let out = t.path().join("series");
    let o = run(&[
        "convert",
        "--corpus",
        s(&c),
        "--detections",
        s(&c.join("gt")),
        "--out",
        s(&out),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // legend presence varies with the seed
    for e in fs::read_dir(c.join("annotations")).unwrap() {
        let ann =
            chartextract_core::io::parse_annotation(&fs::read(e.unwrap().path()).unwrap()).unwrap();
        let csv = fs::read(out.join(format!("{}.series.csv", ann.image_id()))).unwrap();
        let series = chartextract_core::series::parse_series_csv(&csv).unwrap();
        if ann.legends().is_empty() {
            assert_eq!(series.len(), 1);
            assert_eq!(series[0].name(), "series-0");
        } else {
            assert_eq!(series.len(), ann.legends().len());
        }
    }
}

#[test]
fn embedding_features_need_a_readable_file() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "bar", "1");
    let (gt, out) = (c.join("gt"), t.path().join("o"));
    let base = [
        "convert",
        "--corpus",
        s(&c),
        "--detections",
        s(&gt),
        "--out",
        s(&out),
    ];
    let o = run(&[&base[..], &["--features", "embedding"]].concat());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--embeddings"));
    let missing = t.path().join("missing.tsv");
    let o = run(&[
        &base[..],
        &["--features", "embedding", "--embeddings", s(&missing)],
    ]
    .concat());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--embeddings"));
}

#[test]
fn evaluate_perfect_and_empty_predictions() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "bar,scatter,line,boxplot", "8");
    let out = t.path().join("r1");
    let o = run(&[
        "evaluate",
        "--gt",
        s(&c),
        "--pred",
        s(&c.join("gt")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = EvalReport::from_json(&fs::read(out.join("report.json")).unwrap()).unwrap();
    for v in r.aggregate.fields().into_iter().flatten() {
        assert_eq!(v, 100.0);
    }
    assert_eq!(
        fs::read_to_string(out.join("report.txt")).unwrap(),
        String::from_utf8(o.stdout).unwrap()
    );

    let empty = t.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let out = t.path().join("r2");
    let o = run(&[
        "evaluate",
        "--gt",
        s(&c),
        "--pred",
        s(&empty),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let r = EvalReport::from_json(&fs::read(out.join("report.json")).unwrap()).unwrap();
    for v in r.aggregate.fields().into_iter().flatten() {
        assert_eq!(v, 0.0);
    }
}

#[test]
fn report_table_matches_golden_file() {
    let t = tempfile::tempdir().unwrap();
    let c = corpus(t.path(), "bar,scatter", "2");
    let out = t.path().join("r");
    let o = run(&[
        "evaluate",
        "--gt",
        s(&c),
        "--pred",
        s(&c.join("gt")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/perfect_report.txt");
    assert_eq!(
        fs::read_to_string(out.join("report.txt")).unwrap(),
        fs::read_to_string(golden).unwrap()
    );
}

#[test]
fn pipeline_with_oracle_detections() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("p");
    let o = run(&[
        "pipeline",
        "--seed",
        "3",
        "--count",
        "4",
        "--types",
        "scatter",
        "--detector",
        "oracle",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    for k in ["s0", "s1", "s2", "s3"] {
        assert!(text.lines().any(|l| l.starts_with(k)), "{text}");
    }
    let r = EvalReport::from_json(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert!(r.aggregate.s2.unwrap() >= 99.0);
    // no temporary files left behind
    for dir in ["pred", "corpus/images", "corpus/gt"] {
        for e in fs::read_dir(out.join(dir)).unwrap() {
            let name = e.unwrap().file_name().into_string().unwrap();
            assert!(!name.starts_with(".tmp"), "{name}");
        }
    }
}
