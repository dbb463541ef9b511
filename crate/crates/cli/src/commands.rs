use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chartextract_core::conversion::{
    self, load_embeddings, ConvertOptions, FeatureKind, FeatureVector,
};
use chartextract_core::detect::{detect_bars, detect_points, BarDetectParams, PointDetectParams};
use chartextract_core::eval::{evaluate_image, EvalReport};
use chartextract_core::heatmap::{self, DecodeParams, Heatmap};
use chartextract_core::io::{
    parse_annotation, parse_detections, serialize_detections, write_atomic,
};
use chartextract_core::raster::{decode_image, encode_image, ImageBuffer};
use chartextract_core::series::{
    parse_series_csv, parse_series_json, serialize_series_csv, serialize_series_json,
};
use chartextract_core::synth::{generate_corpus, Manifest};
use chartextract_core::{
    ChartAnnotation, ChartType, DataSeries, DetectionKind, DetectionSet, Scored,
};
use clap::ValueEnum;
use rayon::prelude::*;

use crate::{
    overlay, usage, ConvertArgs, CorpusArgs, DetectArgs, Detector, EvaluateArgs, FeatureArgs,
    Features, GenerateArgs, InputArgs, PipelineArgs, SeriesFormat,
};

/// One chart to process, with optional ground truth.
struct ChartInput {
    id: String,
    image: PathBuf,
    annotation: PathBuf,
    gt_detections: Option<PathBuf>,
    gt_series: Option<PathBuf>,
}

impl ChartInput {
    fn load(&self) -> Result<(ImageBuffer, ChartAnnotation)> {
        let img = checked(decode_image(&read(&self.image, "image")?), &self.image)?;
        let ann = load_annotation(&self.annotation)?;
        checked(
            ann.check_image_bounds(img.width(), img.height()),
            &self.annotation,
        )?;
        Ok((img, ann))
    }
}

fn read(path: &Path, what: &str) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| usage!("{what}: cannot read {}: {e}", path.display()))
}

/// Input documents that fail validation are the caller's problem, not ours.
fn checked<T>(r: chartextract_core::Result<T>, path: &Path) -> Result<T> {
    r.map_err(|e| usage!("{}: {e}", path.display()))
}

fn load_annotation(path: &Path) -> Result<ChartAnnotation> {
    checked(parse_annotation(&read(path, "annotation")?), path)
}

fn load_detections(path: &Path, flag: &str) -> Result<DetectionSet> {
    checked(parse_detections(&read(path, flag)?), path)
}

fn load_series(path: &Path, flag: &str) -> Result<Vec<DataSeries>> {
    let bytes = read(path, flag)?;
    if path.extension().is_some_and(|e| e == "csv") {
        checked(parse_series_csv(&bytes), path)
    } else {
        checked(parse_series_json(&bytes), path)
    }
}

fn corpus_inputs(dir: &Path, flag: &str) -> Result<Vec<ChartInput>> {
    let path = dir.join("manifest.json");
    let manifest = checked(Manifest::from_json(&read(&path, flag)?), &path)?;
    Ok(manifest
        .charts
        .into_iter()
        .map(|c| ChartInput {
            image: dir.join(&c.paths.image),
            annotation: dir.join(&c.paths.annotation),
            gt_detections: Some(dir.join(&c.paths.detections)),
            gt_series: Some(dir.join(&c.paths.series)),
            id: c.id,
        })
        .collect())
}

fn list_inputs(a: &InputArgs) -> Result<Vec<ChartInput>> {
    match (&a.corpus, &a.image, &a.annotation) {
        (Some(dir), _, _) => corpus_inputs(dir, "--corpus"),
        (None, Some(image), Some(annotation)) => Ok(vec![ChartInput {
            id: load_annotation(annotation)?.image_id().to_string(),
            image: image.clone(),
            annotation: annotation.clone(),
            gt_detections: None,
            gt_series: None,
        }]),
        _ => Err(usage!(
            "either --corpus or --image with --annotation is required"
        )),
    }
}

fn weights(types: &[ChartType]) -> Vec<(ChartType, f64)> {
    let types = if types.is_empty() {
        &ChartType::ALL[..]
    } else {
        types
    };
    let mut out: Vec<(ChartType, f64)> = Vec::new();
    for &t in types {
        if !out.iter().any(|w| w.0 == t) {
            out.push((t, 1.0));
        }
    }
    out
}

fn make_corpus(a: &CorpusArgs, out: &Path) -> Result<Manifest> {
    if a.count == 0 {
        return Err(usage!("--count must be at least 1"));
    }
    Ok(generate_corpus(a.seed, a.count, &weights(&a.types), out)?)
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    make_corpus(&a.corpus, &a.out)?;
    println!("{}", a.out.join("manifest.json").display());
    Ok(())
}

fn detector_name(d: Detector) -> String {
    d.to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default()
}

/// Flag checks that do not depend on image content.
fn validate_detector(
    detector: Detector,
    external: Option<&Path>,
    inputs: &[ChartInput],
) -> Result<()> {
    match detector {
        Detector::ExternalFile => match external {
            None => return Err(usage!("--detector external-file needs --input DIR")),
            Some(dir) if !dir.is_dir() => {
                return Err(usage!("--input: {} is not a directory", dir.display()))
            }
            _ => {}
        },
        Detector::Oracle if inputs.iter().any(|i| i.gt_detections.is_none()) => {
            return Err(usage!(
                "--detector oracle needs a --corpus with ground truth"
            ));
        }
        _ => {}
    }
    if external.is_some() && detector != Detector::ExternalFile {
        log::warn!("--input is only read by the external-file detector");
    }
    Ok(())
}

/// Reads `{id}.detections.json`, or decodes `{id}.heatmap.png` into points.
fn external_detections(dir: &Path, id: &str, ann: &ChartAnnotation) -> Result<DetectionSet> {
    let json = dir.join(format!("{id}.detections.json"));
    if json.is_file() {
        let d = load_detections(&json, "--input")?;
        return Ok(DetectionSet::new(id, d.detections().clone()));
    }
    let png = dir.join(format!("{id}.heatmap.png"));
    if png.is_file() {
        let img = checked(decode_image(&read(&png, "--input")?), &png)?;
        let h = Heatmap::from_image(&img);
        let params = DecodeParams::default().with_plot_bb(Some(ann.plot_bb()));
        let points = heatmap::decode(&h, &params)
            .into_iter()
            .map(|p| {
                let x = (p.x() as usize).min(h.width() - 1);
                let y = (p.y() as usize).min(h.height() - 1);
                Scored::new(p, h.get(x, y))
            })
            .collect::<chartextract_core::Result<Vec<_>>>()?;
        return Ok(DetectionSet::points(id, points));
    }
    Err(usage!(
        "--input: neither {} nor {} exists",
        json.display(),
        png.display()
    ))
}

fn run_detector(
    detector: Detector,
    external: Option<&Path>,
    input: &ChartInput,
    img: &ImageBuffer,
    ann: &ChartAnnotation,
) -> Result<DetectionSet> {
    let chart = ann.chart_type();
    let want = chart.element_kind();
    let plot = ann.plot_bb();
    let id = input.id.as_str();
    let finds = match detector {
        Detector::Auto => want,
        Detector::CcBars => DetectionKind::Boxes,
        Detector::CcPoints => DetectionKind::Points,
        _ => want,
    };
    if finds != want {
        return Err(usage!(
            "--detector {} finds {} but {id} is a {chart} chart",
            detector_name(detector),
            finds.as_str()
        ));
    }
    let d = match detector {
        Detector::Auto | Detector::CcBars | Detector::CcPoints => match want {
            DetectionKind::Boxes => detect_bars(img, &BarDetectParams::new(plot), id)?,
            DetectionKind::Points => detect_points(img, &PointDetectParams::new(plot), id)?,
        },
        Detector::ExternalFile => external_detections(external.expect("validated"), id, ann)?,
        Detector::Oracle => load_detections(
            input.gt_detections.as_deref().expect("validated"),
            "--corpus",
        )?,
    };
    if d.kind() != want {
        return Err(usage!(
            "--detector {}: {} detections do not fit {id}, a {chart} chart",
            detector_name(detector),
            d.kind().as_str()
        ));
    }
    Ok(d)
}

fn detect_one(
    input: &ChartInput,
    detector: Detector,
    external: Option<&Path>,
    out: &Path,
    overlay_dir: Option<&Path>,
) -> Result<()> {
    let (img, ann) = input.load()?;
    let d = run_detector(detector, external, input, &img, &ann)?;
    write_atomic(
        &out.join(format!("{}.detections.json", input.id)),
        &serialize_detections(&d)?,
    )?;
    if let Some(dir) = overlay_dir {
        let drawn = overlay::draw(&img, &d);
        write_atomic(
            &dir.join(format!("{}.overlay.png", input.id)),
            &encode_image(&drawn)?,
        )?;
    }
    Ok(())
}

pub fn detect(a: &DetectArgs) -> Result<()> {
    let inputs = list_inputs(&a.input)?;
    validate_detector(a.detector, a.external.as_deref(), &inputs)?;
    inputs.par_iter().try_for_each(|i| {
        detect_one(
            i,
            a.detector,
            a.external.as_deref(),
            &a.out,
            a.overlay.as_deref(),
        )
    })?;
    println!("{} detection files in {}", inputs.len(), a.out.display());
    Ok(())
}

type Embeddings = BTreeMap<String, FeatureVector>;

fn feature_setup(f: &FeatureArgs) -> Result<(FeatureKind, Option<Embeddings>)> {
    let kind = match f.features {
        Features::Rgb => FeatureKind::RgbHist,
        Features::Hsv => FeatureKind::HsvHist,
        Features::RgbHsv => FeatureKind::Concat,
        Features::Embedding => FeatureKind::ExternalEmbedding,
    };
    match (&f.embeddings, kind) {
        (None, FeatureKind::ExternalEmbedding) => {
            Err(usage!("--features embedding needs --embeddings FILE"))
        }
        (Some(path), FeatureKind::ExternalEmbedding) => {
            let map = checked(load_embeddings(&read(path, "--embeddings")?), path)?;
            Ok((kind, Some(map)))
        }
        (Some(_), _) => {
            log::warn!("--embeddings is only read with --features embedding");
            Ok((kind, None))
        }
        (None, _) => Ok((kind, None)),
    }
}

fn convert_one(
    input: &ChartInput,
    detections: &Path,
    out: &Path,
    opts: &ConvertOptions<'_>,
    format: SeriesFormat,
) -> Result<()> {
    let (img, ann) = input.load()?;
    let path = detections.join(format!("{}.detections.json", input.id));
    let dets = load_detections(&path, "--detections")?;
    if dets.kind() != ann.chart_type().element_kind() {
        return Err(usage!(
            "--detections: {} holds {} but {} is a {} chart",
            path.display(),
            dets.kind().as_str(),
            input.id,
            ann.chart_type()
        ));
    }
    let series = conversion::convert(&img, &ann, &dets, opts)
        .with_context(|| format!("converting {}", input.id))?;
    write_series(out, &input.id, &series, format)
}

fn write_series(out: &Path, id: &str, series: &[DataSeries], format: SeriesFormat) -> Result<()> {
    let (ext, bytes) = match format {
        SeriesFormat::Json => ("json", serialize_series_json(series)?),
        SeriesFormat::Csv => ("csv", serialize_series_csv(series)?),
    };
    write_atomic(&out.join(format!("{id}.series.{ext}")), &bytes)?;
    Ok(())
}

pub fn convert(a: &ConvertArgs) -> Result<()> {
    let inputs = list_inputs(&a.input)?;
    let (feature_kind, embeddings) = feature_setup(&a.features)?;
    if !a.detections.is_dir() {
        return Err(usage!(
            "--detections: {} is not a directory",
            a.detections.display()
        ));
    }
    let opts = ConvertOptions {
        feature_kind,
        embeddings: embeddings.as_ref(),
        ..Default::default()
    };
    inputs
        .par_iter()
        .try_for_each(|i| convert_one(i, &a.detections, &a.out, &opts, a.format))?;
    println!("{} series files in {}", inputs.len(), a.out.display());
    Ok(())
}

fn check_name_weight(w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(usage!("--name-weight must lie in [0, 1], got {w}"))
    }
}

/// Prediction file if present. JSON series win over CSV.
fn optional<T>(paths: &[PathBuf], load: impl Fn(&Path) -> Result<T>) -> Result<Option<T>> {
    paths
        .iter()
        .find(|p| p.is_file())
        .map(|p| load(p))
        .transpose()
}

fn evaluate_inputs(inputs: &[ChartInput], pred: &Path, name_weight: f64) -> Result<EvalReport> {
    let per_image = inputs
        .par_iter()
        .map(|i| {
            let ann = load_annotation(&i.annotation)?;
            let gt_d = i
                .gt_detections
                .as_deref()
                .map(|p| load_detections(p, "--gt"))
                .transpose()?;
            let gt_s = i
                .gt_series
                .as_deref()
                .map(|p| load_series(p, "--gt"))
                .transpose()?;
            let pd = optional(&[pred.join(format!("{}.detections.json", i.id))], |p| {
                load_detections(p, "--pred")
            })?;
            let ps = optional(
                &[
                    pred.join(format!("{}.series.json", i.id)),
                    pred.join(format!("{}.series.csv", i.id)),
                ],
                |p| load_series(p, "--pred"),
            )?;
            let scores = evaluate_image(
                &ann.plot_bb(),
                gt_d.as_ref(),
                pd.as_ref(),
                gt_s.as_deref(),
                ps.as_deref(),
                name_weight,
            );
            Ok((i.id.clone(), scores))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(EvalReport::new(per_image))
}

fn write_report(out: &Path, report: &EvalReport) -> Result<()> {
    write_atomic(&out.join("report.json"), &report.to_json()?)?;
    write_atomic(&out.join("report.txt"), report.to_text_table().as_bytes())?;
    Ok(())
}

pub fn evaluate(a: &EvaluateArgs) -> Result<()> {
    check_name_weight(a.name_weight)?;
    let inputs = corpus_inputs(&a.gt, "--gt")?;
    if !a.pred.is_dir() {
        return Err(usage!("--pred: {} is not a directory", a.pred.display()));
    }
    let report = evaluate_inputs(&inputs, &a.pred, a.name_weight)?;
    write_report(&a.out, &report)?;
    print!("{}", report.to_text_table());
    Ok(())
}

fn fmt_score(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

pub fn pipeline(a: &PipelineArgs) -> Result<()> {
    check_name_weight(a.name_weight)?;
    let (feature_kind, embeddings) = feature_setup(&a.features)?;
    let corpus_dir = match &a.existing {
        Some(dir) => dir.clone(),
        None => {
            let dir = a.out.join("corpus");
            make_corpus(&a.corpus, &dir)?;
            dir
        }
    };
    let inputs = corpus_inputs(&corpus_dir, "--corpus")?;
    validate_detector(a.detector, a.external.as_deref(), &inputs)?;
    let pred = a.out.join("pred");
    let overlays = a.overlay.then(|| a.out.join("overlays"));
    let opts = ConvertOptions {
        feature_kind,
        embeddings: embeddings.as_ref(),
        ..Default::default()
    };
    inputs.par_iter().try_for_each(|i| -> Result<()> {
        detect_one(
            i,
            a.detector,
            a.external.as_deref(),
            &pred,
            overlays.as_deref(),
        )?;
        // a chart that cannot be converted simply scores zero
        if let Err(e) = convert_one(i, &pred, &pred, &opts, SeriesFormat::Json) {
            log::warn!("{e:#}");
        }
        Ok(())
    })?;
    let report = evaluate_inputs(&inputs, &pred, a.name_weight)?;
    write_report(&a.out, &report)?;
    let agg = report.aggregate;
    println!("charts  {}", inputs.len());
    println!("s0      {}", fmt_score(agg.score_a));
    println!("s1      {}", fmt_score(agg.s1));
    println!("s2      {}", fmt_score(agg.s2));
    println!("s3      {}", fmt_score(agg.s3));
    println!("report  {}", a.out.join("report.txt").display());
    Ok(())
}
