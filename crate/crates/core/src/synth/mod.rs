//! Deterministic synthetic charts with exact ground truth.
//!
//! Marks are drawn without anti-aliasing and snapped to the pixel grid: bar and
//! box edges fall on pixel edges, markers and line vertices on pixel centers.
//! Ground-truth values are read back from the snapped geometry, so a perfect
//! extractor reproduces them up to floating-point error.

mod corpus;
mod draw;
mod font;

pub use corpus::{
    apportion, chart_paths, corpus_specs, generate_corpus, splitmix64, write_chart, ChartPaths,
    Manifest, ManifestEntry, CORPUS_MARKER_SEPARATION,
};
pub use font::{draw_text, text_width};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conversion::DEFAULT_SERIES_NAME;
use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2D};
use crate::model::{
    Axis, ChartAnnotation, ChartType, DetectionSet, LegendEntry, Orientation, ScaleKind, Scored,
    TickPoint,
};
use crate::raster::{Channels, ImageBuffer};
use crate::series::{DataSeries, FiveNumber, Record};
use draw::Rgb;

pub const DEFAULT_PALETTE: [Rgb; 5] = [
    [220, 40, 40],
    [40, 80, 220],
    [30, 160, 60],
    [240, 150, 20],
    [150, 50, 190],
];

const WHITE: Rgb = [255, 255, 255];
const BLACK: Rgb = [0, 0, 0];
const GRID: Rgb = [225, 225, 225];

const TOP_MARGIN: i64 = 16;
const RIGHT_MARGIN: i64 = 16;
const LEGEND_MARGIN: i64 = 72;
const LEGEND_SWATCH: i64 = 10;
const LEGEND_PITCH: i64 = 18;

const MIN_BAR_LENGTH: i64 = 5;
const MIN_BAR_WIDTH: i64 = 4;
const SERIES_GAP: i64 = 2;
/// Vertical distance in pixels between line series at a shared x.
const LINE_SERIES_GAP: i64 = 10;
const SCATTER_X_RANGE: (f64, f64) = (0.0, 100.0);
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    pub gridlines: bool,
    /// Marker disc radius in pixels.
    pub marker_size: usize,
    /// Share of each category slot left empty between bar groups.
    pub bar_gap_ratio: f64,
    /// Left and bottom margin holding the axes and their labels.
    pub axis_margin: usize,
}

impl Default for Style {
    fn default() -> Self {
        Self {
            gridlines: true,
            marker_size: 3,
            bar_gap_ratio: 0.3,
            axis_margin: 56,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub image_id: String,
    pub seed: u64,
    pub chart_type: ChartType,
    pub width: usize,
    pub height: usize,
    pub n_series: usize,
    /// Categories for bar and boxplot charts, points per series otherwise.
    pub n_items: usize,
    pub palette: Vec<Rgb>,
    pub style: Style,
    /// Value-axis range; bars grow from `lo`.
    pub value_range: (f64, f64),
    pub scale: ScaleKind,
    /// Smallest center distance between any two scatter markers.
    pub min_marker_separation: Option<f64>,
}

impl GenSpec {
    pub fn new(chart_type: ChartType, seed: u64) -> Self {
        Self {
            image_id: format!("{chart_type}-{seed:016x}"),
            seed,
            chart_type,
            width: 640,
            height: 480,
            n_series: 1,
            n_items: 6,
            palette: DEFAULT_PALETTE.to_vec(),
            style: Style::default(),
            value_range: (0.0, 100.0),
            scale: ScaleKind::Linear,
            min_marker_separation: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.n_series) {
            return Err(Error::invalid("n_series", "must lie in 1..=5"));
        }
        // scatter markers need no per-item slot on the category axis
        let max_items = if self.chart_type == ChartType::Scatter {
            100
        } else {
            40
        };
        if !(1..=max_items).contains(&self.n_items) {
            return Err(Error::invalid(
                "n_items",
                format!("must lie in 1..={max_items}"),
            ));
        }
        if self.palette.len() < self.n_series {
            return Err(Error::invalid("palette", "fewer colors than series"));
        }
        let used = &self.palette[..self.n_series];
        for (i, c) in used.iter().enumerate() {
            if *c == WHITE || *c == GRID || *c == BLACK || used[..i].contains(c) {
                return Err(Error::invalid(
                    format!("palette[{i}]"),
                    "colors must be distinct and differ from white, black and the grid gray",
                ));
            }
        }
        let r = self.style.bar_gap_ratio;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid("style.bar_gap_ratio", "must lie in (0, 1)"));
        }
        if self.style.marker_size == 0 {
            return Err(Error::invalid("style.marker_size", "must be at least 1"));
        }
        let (lo, hi) = self.value_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid("value_range", "need finite lo < hi"));
        }
        if self.scale == ScaleKind::Exponential && lo <= 0.0 {
            return Err(Error::invalid(
                "value_range",
                "exponential scale needs lo > 0",
            ));
        }
        if let Some(s) = self.min_marker_separation {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::invalid(
                    "min_marker_separation",
                    "must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }

    fn series_names(&self) -> Vec<String> {
        if self.n_series == 1 {
            vec![DEFAULT_SERIES_NAME.to_string()]
        } else {
            (1..=self.n_series).map(|k| format!("S{k}")).collect()
        }
    }
}

/// One rendered chart and its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedChart {
    pub image: ImageBuffer,
    pub annotation: ChartAnnotation,
    pub gt_detections: DetectionSet,
    pub gt_series: Vec<DataSeries>,
}

/// Plot rectangle `[x0, x1) x [y0, y1)` in pixels.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
}

impl Frame {
    fn new(spec: &GenSpec) -> Result<Self> {
        let m = spec.style.axis_margin as i64;
        let right = if spec.n_series >= 2 {
            LEGEND_MARGIN
        } else {
            RIGHT_MARGIN
        };
        let f = Self {
            x0: m,
            y0: TOP_MARGIN,
            x1: spec.width as i64 - right,
            y1: spec.height as i64 - m,
        };
        if f.w() < 20 || f.h() < 20 {
            return Err(Error::invalid("spec", "plot area smaller than 20x20 px"));
        }
        if spec.n_series >= 2 && 4 + LEGEND_PITCH * spec.n_series as i64 > f.h() {
            return Err(Error::invalid(
                "spec",
                "legend does not fit beside the plot",
            ));
        }
        Ok(f)
    }

    fn w(&self) -> i64 {
        self.x1 - self.x0
    }

    fn h(&self) -> i64 {
        self.y1 - self.y0
    }

    fn bb(&self) -> BoundingBox {
        BoundingBox::new(
            self.x0 as f64,
            self.y0 as f64,
            self.x1 as f64,
            self.y1 as f64,
        )
        .expect("ordered frame")
    }

    /// Pixel rectangle of a mark spanning `[c0, c1)` across the category axis
    /// and `[d0, d1)` along the value axis, both measured from the axis origin.
    fn rect(&self, vertical: bool, c0: i64, c1: i64, d0: i64, d1: i64) -> [i64; 4] {
        if vertical {
            [self.x0 + c0, self.y1 - d1, self.x0 + c1, self.y1 - d0]
        } else {
            [self.x0 + d0, self.y0 + c0, self.x0 + d1, self.y0 + c1]
        }
    }
}

/// Maps an offset `d` in pixels along a value axis to a value.
#[derive(Debug, Clone, Copy)]
struct ValueMap {
    lo: f64,
    hi: f64,
    scale: ScaleKind,
    len: f64,
}

impl ValueMap {
    fn value(&self, d: f64) -> f64 {
        let t = d / self.len;
        match self.scale {
            ScaleKind::Linear => self.lo + t * (self.hi - self.lo),
            ScaleKind::Exponential => {
                let (a, b) = (self.lo.log10(), self.hi.log10());
                10f64.powf(a + t * (b - a))
            }
        }
    }

    fn offset(&self, v: f64) -> f64 {
        let t = match self.scale {
            ScaleKind::Linear => (v - self.lo) / (self.hi - self.lo),
            ScaleKind::Exponential => {
                let (a, b) = (self.lo.log10(), self.hi.log10());
                (v.log10() - a) / (b - a)
            }
        };
        t * self.len
    }

    /// Labeled tick values inside the range; each value is the parse of its
    /// label.
    fn ticks(&self) -> Vec<(String, f64)> {
        let out = match self.scale {
            ScaleKind::Linear => linear_ticks(self.lo, self.hi),
            ScaleKind::Exponential => decade_ticks(self.lo, self.hi),
        };
        if out.len() >= 2 {
            return out;
        }
        [self.lo, self.hi]
            .iter()
            .map(|v| (format!("{v}"), *v))
            .collect()
    }
}

fn labeled(label: String) -> (String, f64) {
    let v = label.parse().expect("formatted number");
    (label, v)
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<(String, f64)> {
    let raw = (hi - lo) / 5.0;
    let exp = raw.log10().floor();
    let mag = 10f64.powf(exp);
    let mult = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .find(|m| m * mag >= raw)
        .unwrap_or(10.0);
    let step = mult * mag;
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let k0 = (lo / step - 1e-9).ceil() as i64;
    let k1 = (hi / step + 1e-9).floor() as i64;
    (k0..=k1)
        .map(|k| {
            let s = format!("{:.*}", decimals, k as f64 * step);
            labeled(
                if s.starts_with('-') && s.trim_matches(['-', '0', '.']).is_empty() {
                    s[1..].to_string()
                } else {
                    s
                },
            )
        })
        .filter(|(_, v)| (lo..=hi).contains(v))
        .collect()
}

fn decade_ticks(lo: f64, hi: f64) -> Vec<(String, f64)> {
    let k0 = (lo.log10() - 1e-9).ceil() as i32;
    let k1 = (hi.log10() + 1e-9).floor() as i32;
    (k0..=k1)
        .map(|k| {
            labeled(if k >= 0 {
                format!("1{}", "0".repeat(k as usize))
            } else {
                format!("0.{}1", "0".repeat((-k - 1) as usize))
            })
        })
        .filter(|(_, v)| (lo..=hi).contains(v))
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Mark {
    Rect([i64; 4], Rgb),
    Line((i64, i64), (i64, i64), Rgb),
    Disc(i64, i64, i64, Rgb),
}

struct Tick {
    /// Pixel coordinate along the axis.
    pixel: f64,
    label: String,
    value: Option<f64>,
}

struct Layout {
    marks: Vec<Mark>,
    boxes: Vec<BoundingBox>,
    points: Vec<Point2D>,
    series: Vec<Vec<Record>>,
    x_ticks: Vec<Tick>,
    y_ticks: Vec<Tick>,
    x_scale: Option<ScaleKind>,
    y_scale: Option<ScaleKind>,
}

impl Layout {
    fn new(n_series: usize) -> Self {
        Self {
            marks: Vec::new(),
            boxes: Vec::new(),
            points: Vec::new(),
            series: vec![Vec::new(); n_series],
            x_ticks: Vec::new(),
            y_ticks: Vec::new(),
            x_scale: None,
            y_scale: None,
        }
    }

    fn push_rect(&mut self, r: [i64; 4], c: Rgb, gt: bool) {
        self.marks.push(Mark::Rect(r, c));
        if gt {
            let b = BoundingBox::new(r[0] as f64, r[1] as f64, r[2] as f64, r[3] as f64);
            self.boxes.push(b.expect("ordered rect"));
        }
    }
}

fn declared(scale: ScaleKind) -> Option<ScaleKind> {
    (scale == ScaleKind::Exponential).then_some(scale)
}

fn numeric_ticks(vm: &ValueMap, pixel: impl Fn(f64) -> f64) -> Vec<Tick> {
    vm.ticks()
        .into_iter()
        .map(|(label, v)| Tick {
            pixel: pixel(vm.offset(v)),
            label,
            value: Some(v),
        })
        .collect()
}

/// Category groups along an axis of `len` pixels: the first pixel of each
/// group relative to the axis origin, the group center, and the mark width.
fn group_layout(
    len: i64,
    n: usize,
    series: usize,
    gap_ratio: f64,
) -> Result<(Vec<(i64, f64)>, i64)> {
    let s = series as i64;
    let slot = len as f64 / n as f64;
    let width =
        ((slot * (1.0 - gap_ratio) - (SERIES_GAP * (s - 1)) as f64) / s as f64).floor() as i64;
    if width < MIN_BAR_WIDTH {
        return Err(Error::invalid(
            "spec",
            format!("marks would be {width} px wide, need at least {MIN_BAR_WIDTH}"),
        ));
    }
    let total = s * width + SERIES_GAP * (s - 1);
    let groups = (0..n)
        .map(|k| {
            let center = (k as f64 + 0.5) * slot;
            let start = (center - total as f64 / 2.0).round() as i64;
            (start, start as f64 + total as f64 / 2.0)
        })
        .collect();
    Ok((groups, width))
}

fn category_label(k: usize) -> String {
    format!("C{}", k + 1)
}

fn category_ticks(f: &Frame, vertical: bool, groups: &[(i64, f64)]) -> Vec<Tick> {
    let origin = if vertical { f.x0 } else { f.y0 } as f64;
    groups
        .iter()
        .enumerate()
        .map(|(k, &(_, center))| Tick {
            pixel: origin + center,
            label: category_label(k),
            value: None,
        })
        .collect()
}

fn bar_like_axes(spec: &GenSpec, f: &Frame) -> (bool, i64, i64, ValueMap) {
    let vertical = spec.chart_type.value_orientation() == Orientation::Vertical;
    let (cat_len, val_len) = if vertical {
        (f.w(), f.h())
    } else {
        (f.h(), f.w())
    };
    let vm = ValueMap {
        lo: spec.value_range.0,
        hi: spec.value_range.1,
        scale: spec.scale,
        len: val_len as f64,
    };
    (vertical, cat_len, val_len, vm)
}

fn set_bar_like_ticks(
    l: &mut Layout,
    spec: &GenSpec,
    f: &Frame,
    vertical: bool,
    vm: &ValueMap,
    groups: &[(i64, f64)],
) {
    let cats = category_ticks(f, vertical, groups);
    if vertical {
        let y1 = f.y1 as f64;
        l.x_ticks = cats;
        l.y_ticks = numeric_ticks(vm, |d| y1 - d);
        l.y_scale = declared(spec.scale);
    } else {
        let x0 = f.x0 as f64;
        l.y_ticks = cats;
        l.x_ticks = numeric_ticks(vm, |d| x0 + d);
        l.x_scale = declared(spec.scale);
    }
}

fn layout_bars(spec: &GenSpec, f: &Frame, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let (vertical, cat_len, val_len, vm) = bar_like_axes(spec, f);
    if val_len - 2 < MIN_BAR_LENGTH {
        return Err(Error::invalid("spec", "value axis too short for bars"));
    }
    let (groups, bw) = group_layout(
        cat_len,
        spec.n_items,
        spec.n_series,
        spec.style.bar_gap_ratio,
    )?;
    let mut l = Layout::new(spec.n_series);
    for (k, &(start, _)) in groups.iter().enumerate() {
        for s in 0..spec.n_series {
            let c0 = start + s as i64 * (bw + SERIES_GAP);
            let d = rng.random_range(MIN_BAR_LENGTH..=val_len - 2);
            l.push_rect(f.rect(vertical, c0, c0 + bw, 0, d), spec.palette[s], true);
            l.series[s].push(Record::Categorical {
                category: category_label(k),
                value: vm.value(d as f64),
            });
        }
    }
    set_bar_like_ticks(&mut l, spec, f, vertical, &vm, &groups);
    Ok(l)
}

/// Offsets along the value axis of one box glyph: the lower cap line, the
/// lower box edge, the median line, the upper box edge and the upper cap line.
/// Lines occupy `[a, a + 1)`.
fn sample_box(rng: &mut ChaCha8Rng, len: i64) -> Result<[i64; 5]> {
    for _ in 0..MAX_ATTEMPTS {
        let mut v = [0i64; 5];
        for x in v.iter_mut() {
            *x = rng.random_range(1..=len - 2);
        }
        v.sort_unstable();
        let [a_min, e1, a_med, e3, a_max] = v;
        if e1 - a_min >= 3 && a_med - e1 >= 2 && e3 - (a_med + 1) >= 2 && a_max - e3 >= 2 {
            return Ok(v);
        }
    }
    Err(Error::invalid(
        "spec",
        "value axis too short for box glyphs",
    ))
}

fn layout_boxplots(spec: &GenSpec, f: &Frame, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let (vertical, cat_len, val_len, vm) = bar_like_axes(spec, f);
    if val_len < 16 {
        return Err(Error::invalid(
            "spec",
            "value axis too short for box glyphs",
        ));
    }
    let (groups, bw) = group_layout(
        cat_len,
        spec.n_items,
        spec.n_series,
        spec.style.bar_gap_ratio,
    )?;
    let cw = (bw / 2).max(2);
    let mut l = Layout::new(spec.n_series);
    for &(start, _) in &groups {
        for s in 0..spec.n_series {
            let c0 = start + s as i64 * (bw + SERIES_GAP);
            let [a_min, e1, a_med, e3, a_max] = sample_box(rng, val_len)?;
            let stem = c0 + bw / 2;
            let cap = c0 + (bw - cw) / 2;
            l.push_rect(f.rect(vertical, c0, c0 + bw, e1, e3), spec.palette[s], true);
            l.push_rect(f.rect(vertical, c0, c0 + bw, a_med, a_med + 1), BLACK, true);
            l.push_rect(f.rect(vertical, stem, stem + 1, e3, a_max), BLACK, false);
            l.push_rect(
                f.rect(vertical, stem, stem + 1, a_min + 1, e1),
                BLACK,
                false,
            );
            l.push_rect(
                f.rect(vertical, cap, cap + cw, a_max, a_max + 1),
                BLACK,
                true,
            );
            l.push_rect(
                f.rect(vertical, cap, cap + cw, a_min, a_min + 1),
                BLACK,
                true,
            );
            let v = |d: f64| vm.value(d);
            let five = FiveNumber::new(
                v(a_min as f64 + 0.5),
                v(e1 as f64),
                v(a_med as f64 + 0.5),
                v(e3 as f64),
                v(a_max as f64 + 0.5),
            )?;
            l.series[s].push(Record::Boxplot(five));
        }
    }
    set_bar_like_ticks(&mut l, spec, f, vertical, &vm, &groups);
    Ok(l)
}

fn point_axes(spec: &GenSpec, f: &Frame) -> (ValueMap, ValueMap) {
    let xm = ValueMap {
        lo: SCATTER_X_RANGE.0,
        hi: SCATTER_X_RANGE.1,
        scale: ScaleKind::Linear,
        len: f.w() as f64,
    };
    let ym = ValueMap {
        lo: spec.value_range.0,
        hi: spec.value_range.1,
        scale: spec.scale,
        len: f.h() as f64,
    };
    (xm, ym)
}

fn set_point_ticks(l: &mut Layout, spec: &GenSpec, f: &Frame, xm: &ValueMap, ym: &ValueMap) {
    let (x0, y1) = (f.x0 as f64, f.y1 as f64);
    l.x_ticks = numeric_ticks(xm, |d| x0 + d);
    l.y_ticks = numeric_ticks(ym, |d| y1 - d);
    l.y_scale = declared(spec.scale);
}

/// Pixel center for marker offsets `(ax, ay)` and the record it encodes.
fn marker(f: &Frame, xm: &ValueMap, ym: &ValueMap, ax: i64, ay: i64) -> (Point2D, Record) {
    let (dx, dy) = (ax as f64 + 0.5, ay as f64 + 0.5);
    let p = Point2D::new(f.x0 as f64 + dx, f.y1 as f64 - dy).expect("finite");
    (
        p,
        Record::Numeric {
            x: xm.value(dx),
            y: ym.value(dy),
        },
    )
}

fn by_pixel(a: &(Point2D, Record), b: &(Point2D, Record)) -> std::cmp::Ordering {
    a.0.x()
        .total_cmp(&b.0.x())
        .then(a.0.y().total_cmp(&b.0.y()))
}

fn layout_scatter(spec: &GenSpec, f: &Frame, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let (xm, ym) = point_axes(spec, f);
    let r = spec.style.marker_size as i64;
    if f.w() < 2 * r + 3 || f.h() < 2 * r + 3 {
        return Err(Error::invalid("spec", "plot area too small for markers"));
    }
    let sep = spec.min_marker_separation.unwrap_or(0.0);
    let mut l = Layout::new(spec.n_series);
    let mut placed: Vec<Point2D> = Vec::new();
    for s in 0..spec.n_series {
        let mut pts = Vec::with_capacity(spec.n_items);
        for _ in 0..spec.n_items {
            let mut attempt = 0;
            let m = loop {
                let ax = rng.random_range(r + 1..=f.w() - r - 2);
                let ay = rng.random_range(r + 1..=f.h() - r - 2);
                let m = marker(f, &xm, &ym, ax, ay);
                if placed.iter().all(|q| q.distance(&m.0) >= sep) {
                    break m;
                }
                attempt += 1;
                if attempt == MAX_ATTEMPTS {
                    return Err(Error::invalid(
                        "min_marker_separation",
                        "cannot place all markers this far apart",
                    ));
                }
            };
            placed.push(m.0);
            let (cx, cy) = (m.0.x().floor() as i64, m.0.y().floor() as i64);
            l.marks.push(Mark::Disc(cx, cy, r, spec.palette[s]));
            pts.push(m);
        }
        pts.sort_by(by_pixel);
        for (p, rec) in pts {
            l.points.push(p);
            l.series[s].push(rec);
        }
    }
    set_point_ticks(&mut l, spec, f, &xm, &ym);
    Ok(l)
}

fn layout_lines(spec: &GenSpec, f: &Frame, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let (xm, ym) = point_axes(spec, f);
    let r = spec.style.marker_size as i64;
    let n = spec.n_items as i64;
    let margin = r + 1;
    let span = f.w() - 1 - 2 * margin;
    if f.h() < 2 * r + 3 || span < 0 || (n > 1 && span / (n - 1) < 2 * r + 2) {
        return Err(Error::invalid(
            "spec",
            "plot area too small for this many line vertices",
        ));
    }
    let xs: Vec<i64> = (0..n)
        .map(|k| {
            if n == 1 {
                margin + span / 2
            } else {
                margin + (k as f64 * span as f64 / (n - 1) as f64).round() as i64
            }
        })
        .collect();
    let (lo, hi) = (r + 1, f.h() - r - 2);
    if (hi - lo) < LINE_SERIES_GAP * (spec.n_series as i64 - 1) {
        return Err(Error::invalid(
            "spec",
            "plot too short to separate line series",
        ));
    }
    let mut ys = vec![vec![0i64; xs.len()]; spec.n_series];
    #[allow(clippy::needless_range_loop)] // ys[o][k] reads other series too
    for k in 0..xs.len() {
        for s in 0..spec.n_series {
            let mut attempt = 0;
            ys[s][k] = loop {
                let ay = rng.random_range(lo..=hi);
                if (0..s).all(|o| (ys[o][k] - ay).abs() >= LINE_SERIES_GAP) {
                    break ay;
                }
                attempt += 1;
                if attempt == MAX_ATTEMPTS {
                    return Err(Error::invalid("spec", "cannot separate line series"));
                }
            };
        }
    }
    let mut l = Layout::new(spec.n_series);
    let pixel = |ax: i64, ay: i64| (f.x0 + ax, f.y1 - ay - 1);
    for (s, row) in ys.iter().enumerate() {
        for k in 1..xs.len() {
            let a = pixel(xs[k - 1], row[k - 1]);
            let b = pixel(xs[k], row[k]);
            l.marks.push(Mark::Line(a, b, spec.palette[s]));
        }
    }
    for (s, row) in ys.iter().enumerate() {
        for (k, &ax) in xs.iter().enumerate() {
            let (p, rec) = marker(f, &xm, &ym, ax, row[k]);
            let (cx, cy) = pixel(ax, row[k]);
            l.marks.push(Mark::Disc(cx, cy, r, spec.palette[s]));
            l.points.push(p);
            l.series[s].push(rec);
        }
    }
    set_point_ticks(&mut l, spec, f, &xm, &ym);
    Ok(l)
}

fn paint(
    spec: &GenSpec,
    f: &Frame,
    l: &Layout,
    legend: &[(String, [i64; 4], Rgb)],
) -> Result<ImageBuffer> {
    let mut img = ImageBuffer::filled(spec.width, spec.height, Channels::Rgb8, &WHITE)?;
    if spec.style.gridlines {
        for t in l.y_ticks.iter().filter(|t| t.value.is_some()) {
            let row = t.pixel.floor() as i64;
            if row > f.y0 && row < f.y1 - 1 {
                draw::fill_rect(&mut img, f.x0, row, f.x1, row + 1, GRID);
            }
        }
        for t in l.x_ticks.iter().filter(|t| t.value.is_some()) {
            let col = t.pixel.floor() as i64;
            if col > f.x0 && col < f.x1 - 1 {
                draw::fill_rect(&mut img, col, f.y0, col + 1, f.y1, GRID);
            }
        }
    }
    for m in &l.marks {
        match *m {
            Mark::Rect([x0, y0, x1, y1], c) => draw::fill_rect(&mut img, x0, y0, x1, y1, c),
            Mark::Line(a, b, c) => draw::line(&mut img, a, b, c),
            Mark::Disc(cx, cy, r, c) => draw::disc(&mut img, cx, cy, r, c),
        }
    }
    // axes sit just outside the plot area
    draw::fill_rect(&mut img, f.x0 - 1, f.y0, f.x0, f.y1 + 1, BLACK);
    draw::fill_rect(&mut img, f.x0 - 1, f.y1, f.x1, f.y1 + 1, BLACK);
    let gh = font::GLYPH_HEIGHT as i64;
    for t in &l.y_ticks {
        let row = (t.pixel.floor() as i64).min(f.y1);
        draw::fill_rect(&mut img, f.x0 - 5, row, f.x0 - 1, row + 1, BLACK);
        let w = text_width(&t.label) as i64;
        draw_text(&mut img, f.x0 - 7 - w, row - gh / 2, &t.label, BLACK);
    }
    for t in &l.x_ticks {
        let col = (t.pixel.floor() as i64).max(f.x0 - 1);
        draw::fill_rect(&mut img, col, f.y1 + 1, col + 1, f.y1 + 5, BLACK);
        let w = text_width(&t.label) as i64;
        draw_text(&mut img, col - w / 2, f.y1 + 8, &t.label, BLACK);
    }
    for (name, [x0, y0, x1, y1], c) in legend {
        draw::fill_rect(&mut img, *x0, *y0, *x1, *y1, *c);
        draw_text(&mut img, x1 + 4, y0 + 1, name, BLACK);
    }
    Ok(img)
}

fn axis(o: Orientation, ticks: &[Tick], f: &Frame, scale: Option<ScaleKind>) -> Result<Axis> {
    let ticks = ticks
        .iter()
        .map(|t| {
            let p = match o {
                Orientation::Horizontal => Point2D::new(t.pixel, f.y1 as f64 + 0.5),
                Orientation::Vertical => Point2D::new(f.x0 as f64 - 0.5, t.pixel),
            }?;
            TickPoint::new(p, t.label.clone(), t.value)
        })
        .collect::<Result<Vec<_>>>()?;
    Axis::new(o, ticks, scale)
}

/// Renders the chart described by `spec`. The same spec always yields the
/// same pixels and ground truth.
pub fn generate(spec: &GenSpec) -> Result<GeneratedChart> {
    spec.validate()?;
    let f = Frame::new(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let l = match spec.chart_type {
        ChartType::BarVertical | ChartType::BarHorizontal => layout_bars(spec, &f, &mut rng)?,
        ChartType::BoxplotVertical | ChartType::BoxplotHorizontal => {
            layout_boxplots(spec, &f, &mut rng)?
        }
        ChartType::Scatter => layout_scatter(spec, &f, &mut rng)?,
        ChartType::Line => layout_lines(spec, &f, &mut rng)?,
    };
    let names = spec.series_names();
    let legend: Vec<(String, [i64; 4], Rgb)> = if spec.n_series >= 2 {
        names
            .iter()
            .enumerate()
            .map(|(j, n)| {
                let (x, y) = (f.x1 + 10, f.y0 + 4 + LEGEND_PITCH * j as i64);
                (
                    n.clone(),
                    [x, y, x + LEGEND_SWATCH, y + LEGEND_SWATCH],
                    spec.palette[j],
                )
            })
            .collect()
    } else {
        Vec::new()
    };
    let image = paint(spec, &f, &l, &legend)?;
    let legends = legend
        .iter()
        .map(|(n, r, _)| {
            let bb = BoundingBox::new(r[0] as f64, r[1] as f64, r[2] as f64, r[3] as f64)?;
            LegendEntry::new(n.clone(), bb)
        })
        .collect::<Result<Vec<_>>>()?;
    let annotation = ChartAnnotation::new(
        spec.image_id.clone(),
        spec.chart_type,
        f.bb(),
        axis(Orientation::Horizontal, &l.x_ticks, &f, l.x_scale)?,
        axis(Orientation::Vertical, &l.y_ticks, &f, l.y_scale)?,
        legends,
    )?;
    let gt_detections = if spec.chart_type.element_kind() == crate::model::DetectionKind::Boxes {
        let items = l
            .boxes
            .iter()
            .map(|b| Scored::new(*b, 1.0))
            .collect::<Result<_>>()?;
        DetectionSet::boxes(spec.image_id.clone(), items)
    } else {
        let items = l
            .points
            .iter()
            .map(|p| Scored::new(*p, 1.0))
            .collect::<Result<_>>()?;
        DetectionSet::points(spec.image_id.clone(), items)
    };
    let gt_series = names
        .into_iter()
        .zip(l.series)
        .map(|(n, r)| DataSeries::new(n, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratedChart {
        image,
        annotation,
        gt_detections,
        gt_series,
    })
}
