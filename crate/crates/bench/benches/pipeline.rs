use std::hint::black_box;

use chartextract_bench::{chart, cost_matrix};
use chartextract_core::conversion::{convert, ConvertOptions};
use chartextract_core::detect::{detect_bars, detect_points, BarDetectParams, PointDetectParams};
use chartextract_core::eval::assignment::hungarian;
use chartextract_core::heatmap::{self, DecodeParams, GaussianParams};
use chartextract_core::raster::{decode_image, encode_image, label_components, Connectivity};
use chartextract_core::synth::{generate, GenSpec};
use chartextract_core::ChartType;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn synth(c: &mut Criterion) {
    let spec = GenSpec::new(ChartType::BarVertical, 1);
    c.bench_function("generate bar chart", |b| {
        b.iter(|| generate(black_box(&spec)).unwrap())
    });
}

fn raster(c: &mut Criterion) {
    let ch = chart(ChartType::Scatter, 2, 3, 30);
    let png = encode_image(&ch.image).unwrap();
    c.bench_function("png encode 640x480", |b| {
        b.iter(|| encode_image(black_box(&ch.image)).unwrap())
    });
    c.bench_function("png decode 640x480", |b| {
        b.iter(|| decode_image(black_box(&png)).unwrap())
    });
    c.bench_function("label components 640x480", |b| {
        b.iter(|| label_components(black_box(&ch.image), Connectivity::Eight))
    });
}

fn detectors(c: &mut Criterion) {
    let bars = chart(ChartType::BarVertical, 3, 2, 8);
    let bp = BarDetectParams::new(bars.annotation.plot_bb());
    c.bench_function("detect bars", |b| {
        b.iter(|| detect_bars(black_box(&bars.image), &bp, "b").unwrap())
    });
    let pts = chart(ChartType::Scatter, 4, 2, 30);
    let pp = PointDetectParams::new(pts.annotation.plot_bb());
    c.bench_function("detect points", |b| {
        b.iter(|| detect_points(black_box(&pts.image), &pp, "p").unwrap())
    });
}

fn heatmaps(c: &mut Criterion) {
    let mut group = c.benchmark_group("heatmap");
    for n in [10, 50, 100] {
        let ch = chart(ChartType::Scatter, 5, 1, n);
        let gt = ch.gt_detections.point_items();
        let params = DecodeParams::default().with_plot_bb(Some(ch.annotation.plot_bb()));
        let h = heatmap::encode(&gt, 640, 480, &GaussianParams::default()).unwrap();
        group.bench_with_input(BenchmarkId::new("encode", n), &gt, |b, gt| {
            b.iter(|| heatmap::encode(gt, 640, 480, &GaussianParams::default()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("decode", n), &h, |b, h| {
            b.iter(|| heatmap::decode(h, &params))
        });
    }
    group.finish();
}

fn conversion(c: &mut Criterion) {
    let ch = chart(ChartType::Line, 6, 3, 10);
    let opts = ConvertOptions::default();
    c.bench_function("convert line chart", |b| {
        b.iter(|| {
            convert(
                &ch.image,
                &ch.annotation,
                black_box(&ch.gt_detections),
                &opts,
            )
            .unwrap()
        })
    });
}

fn assignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("hungarian");
    for n in [10, 100, 300] {
        let costs = cost_matrix(n, n, n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &costs, |b, costs| {
            b.iter(|| hungarian(black_box(costs), n, n))
        });
    }
    group.finish();
}

criterion_group!(benches, synth, raster, detectors, heatmaps, conversion, assignment);
criterion_main!(benches);
