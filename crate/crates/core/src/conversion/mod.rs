//! Turns detected elements into named, valued data series: elements are
//! assigned to legend entries by feature distance, then their pixel geometry is
//! mapped through the fitted axis scales.

mod features;
mod legend;
mod scale;

use std::collections::BTreeMap;

pub use features::{
    extract_feature, load_embeddings, rgb_to_hsv, write_embeddings, FeatureKind, FeatureVector,
    EMBEDDING_LEN, HIST_LEN,
};
pub use legend::match_legends;
pub use scale::{fit_axis_scale, fit_axis_scale_or_piecewise, AxisScale, FIT_TOLERANCE};

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2D};
use crate::model::{Axis, ChartAnnotation, ChartType, DetectionSet, Orientation};
use crate::raster::ImageBuffer;
use crate::series::{DataSeries, FiveNumber, Record};

/// Name of the single series produced when a chart has no legend.
pub const DEFAULT_SERIES_NAME: &str = "series-0";

/// Boxes no thicker than this (along the value axis) are read as lines: the
/// median bar or a whisker cap of a boxplot.
const LINE_THICKNESS: f64 = 1.5;

/// Embedding id of the `i`-th detected element of an image.
pub fn element_patch_id(image_id: &str, i: usize) -> String {
    format!("{image_id}/element-{i}")
}

/// Embedding id of the `j`-th legend swatch of an image.
pub fn legend_patch_id(image_id: &str, j: usize) -> String {
    format!("{image_id}/legend-{j}")
}

#[derive(Debug, Clone)]
pub struct ConvertOptions<'a> {
    pub feature_kind: FeatureKind,
    /// Gaussian size of the point detector; point patches are
    /// `(2 sigma + 1)` pixels square.
    pub sigma: f64,
    /// Required when `feature_kind` is [`FeatureKind::ExternalEmbedding`].
    pub embeddings: Option<&'a BTreeMap<String, FeatureVector>>,
}

impl Default for ConvertOptions<'_> {
    fn default() -> Self {
        Self {
            feature_kind: FeatureKind::RgbHist,
            sigma: 2.0,
            embeddings: None,
        }
    }
}

/// Converts one chart's detections into data series.
///
/// Series follow legend order, or a single [`DEFAULT_SERIES_NAME`] series when
/// the chart has no legend. Bars yield categorical records (category = label of
/// the nearest category tick, value read at the bar end away from the
/// baseline). Boxplots yield five-number records per glyph: the thick box gives
/// the quartiles, a line box inside it the median and line boxes beyond it the
/// whisker ends. Scatter and line charts yield numeric pairs; line series are
/// sorted by x.
pub fn convert(
    img: &ImageBuffer,
    ann: &ChartAnnotation,
    detections: &DetectionSet,
    opts: &ConvertOptions<'_>,
) -> Result<Vec<DataSeries>> {
    let chart = ann.chart_type();
    if detections.kind() != chart.element_kind() {
        return Err(Error::KindMismatch(format!(
            "{} detections cannot describe a {chart} chart",
            detections.kind().as_str()
        )));
    }
    match chart {
        ChartType::BarVertical | ChartType::BarHorizontal => {
            convert_bars(img, ann, detections, opts)
        }
        ChartType::BoxplotVertical | ChartType::BoxplotHorizontal => {
            convert_boxplots(img, ann, detections, opts)
        }
        ChartType::Scatter | ChartType::Line => convert_points(img, ann, detections, opts),
    }
}

/// Legend index for every element patch, or all zeros without a legend.
fn assign_series(
    img: &ImageBuffer,
    ann: &ChartAnnotation,
    patches: &[(usize, BoundingBox)],
    opts: &ConvertOptions<'_>,
) -> Result<Vec<usize>> {
    if ann.legends().is_empty() {
        return Ok(vec![0; patches.len()]);
    }
    let id = ann.image_id();
    let (elements, legends) = if opts.feature_kind == FeatureKind::ExternalEmbedding {
        let map = opts.embeddings.ok_or_else(|| {
            Error::invalid("embeddings", "embedding features need an embedding map")
        })?;
        let get = |key: String| {
            map.get(&key)
                .cloned()
                .ok_or_else(|| Error::invalid("embeddings", format!("no embedding for {key:?}")))
        };
        let el = patches
            .iter()
            .map(|(i, _)| get(element_patch_id(id, *i)))
            .collect::<Result<Vec<_>>>()?;
        let lg = (0..ann.legends().len())
            .map(|j| get(legend_patch_id(id, j)))
            .collect::<Result<Vec<_>>>()?;
        (el, lg)
    } else {
        let el = patches
            .iter()
            .map(|(_, p)| extract_feature(img, p, opts.feature_kind))
            .collect::<Result<Vec<_>>>()?;
        let lg = ann
            .legends()
            .iter()
            .map(|l| extract_feature(img, &l.patch_bb(), opts.feature_kind))
            .collect::<Result<Vec<_>>>()?;
        (el, lg)
    };
    match_legends(&elements, &legends)
}

fn series_names(ann: &ChartAnnotation) -> Vec<String> {
    if ann.legends().is_empty() {
        vec![DEFAULT_SERIES_NAME.to_string()]
    } else {
        ann.legends()
            .iter()
            .map(|l| l.label().to_string())
            .collect()
    }
}

/// Index of the tick nearest to `coord`; ties go to the lower pixel coordinate.
fn nearest_tick(axis: &Axis, coord: f64) -> Option<usize> {
    let mut order: Vec<usize> = (0..axis.ticks().len()).collect();
    order.sort_by(|&a, &b| {
        axis.tick_coordinate(&axis.ticks()[a])
            .total_cmp(&axis.tick_coordinate(&axis.ticks()[b]))
    });
    let mut best: Option<(usize, f64)> = None;
    for i in order {
        let d = (axis.tick_coordinate(&axis.ticks()[i]) - coord).abs();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Axis carrying categories and axis carrying values for bar-like charts.
fn bar_axes(ann: &ChartAnnotation) -> (Orientation, &Axis, &Axis) {
    let value_o = ann.chart_type().value_orientation();
    let cat_o = match value_o {
        Orientation::Vertical => Orientation::Horizontal,
        Orientation::Horizontal => Orientation::Vertical,
    };
    (value_o, ann.axis(cat_o), ann.axis(value_o))
}

fn along(o: Orientation, b: &BoundingBox) -> (f64, f64) {
    match o {
        Orientation::Horizontal => (b.x0(), b.x1()),
        Orientation::Vertical => (b.y0(), b.y1()),
    }
}

fn center_along(o: Orientation, b: &BoundingBox) -> f64 {
    let (lo, hi) = along(o, b);
    0.5 * (lo + hi)
}

fn cross(o: Orientation) -> Orientation {
    match o {
        Orientation::Horizontal => Orientation::Vertical,
        Orientation::Vertical => Orientation::Horizontal,
    }
}

fn convert_bars(
    img: &ImageBuffer,
    ann: &ChartAnnotation,
    det: &DetectionSet,
    opts: &ConvertOptions<'_>,
) -> Result<Vec<DataSeries>> {
    let (value_o, cat_axis, value_axis) = bar_axes(ann);
    let scale = fit_axis_scale_or_piecewise(value_axis)?;
    let boxes = det.box_items();
    let patches: Vec<(usize, BoundingBox)> = boxes.iter().copied().enumerate().collect();
    let owner = assign_series(img, ann, &patches, opts)?;
    // Bars grow away from the baseline, the end of the value axis holding its
    // smallest value; the far edge carries the value.
    let baseline_low = scale.pixel_to_value(along(value_o, &ann.plot_bb()).0)
        < scale.pixel_to_value(along(value_o, &ann.plot_bb()).1);
    let names = series_names(ann);
    let mut rows: Vec<Vec<(usize, Record)>> = vec![Vec::new(); names.len()];
    for (b, &s) in boxes.iter().zip(&owner) {
        let Some(tick) = nearest_tick(cat_axis, center_along(cross(value_o), b)) else {
            return Err(Error::invalid(
                "category axis",
                "no ticks to name categories",
            ));
        };
        let (lo, hi) = along(value_o, b);
        let edge = if baseline_low { hi } else { lo };
        rows[s].push((
            tick,
            Record::Categorical {
                category: cat_axis.ticks()[tick].label().to_string(),
                value: scale.pixel_to_value(edge),
            },
        ));
    }
    finish(names, rows)
}

fn finish(names: Vec<String>, rows: Vec<Vec<(usize, Record)>>) -> Result<Vec<DataSeries>> {
    names
        .into_iter()
        .zip(rows)
        .map(|(n, mut r)| {
            r.sort_by_key(|(k, _)| *k);
            DataSeries::new(n, r.into_iter().map(|(_, rec)| rec).collect())
        })
        .collect()
}

fn convert_boxplots(
    img: &ImageBuffer,
    ann: &ChartAnnotation,
    det: &DetectionSet,
    opts: &ConvertOptions<'_>,
) -> Result<Vec<DataSeries>> {
    let (value_o, cat_axis, value_axis) = bar_axes(ann);
    let cat_o = cross(value_o);
    let scale = fit_axis_scale_or_piecewise(value_axis)?;
    let boxes = det.box_items();
    let thickness = |b: &BoundingBox| {
        let (lo, hi) = along(value_o, b);
        hi - lo
    };
    let (lines, bodies): (Vec<_>, Vec<_>) = boxes
        .iter()
        .copied()
        .enumerate()
        .partition(|(_, b)| thickness(b) <= LINE_THICKNESS);
    let owner = assign_series(img, ann, &bodies, opts)?;

    // Each line belongs to the body whose category span contains its center,
    // or else to the body with the nearest center.
    let mut attached: Vec<Vec<f64>> = vec![Vec::new(); bodies.len()];
    for (_, l) in &lines {
        let c = center_along(cat_o, l);
        let pick = bodies
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let key = |bx: &BoundingBox| {
                    let (lo, hi) = along(cat_o, bx);
                    let inside = lo <= c && c <= hi;
                    (!inside, (center_along(cat_o, bx) - c).abs())
                };
                let (ka, kb) = (key(&a.1), key(&b.1));
                ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
            })
            .map(|(k, _)| k);
        if let Some(k) = pick {
            attached[k].push(scale.pixel_to_value(center_along(value_o, l)));
        }
    }

    let names = series_names(ann);
    let mut rows: Vec<Vec<(usize, Record)>> = vec![Vec::new(); names.len()];
    for (((_, body), &s), line_values) in bodies.iter().zip(&owner).zip(&attached) {
        let Some(tick) = nearest_tick(cat_axis, center_along(cat_o, body)) else {
            return Err(Error::invalid(
                "category axis",
                "no ticks to name categories",
            ));
        };
        let (e0, e1) = along(value_o, body);
        let (v0, v1) = (scale.pixel_to_value(e0), scale.pixel_to_value(e1));
        let (q1, q3) = (v0.min(v1), v0.max(v1));
        let inner: Vec<f64> = line_values
            .iter()
            .copied()
            .filter(|v| (q1..=q3).contains(v))
            .collect();
        let median = if inner.is_empty() {
            0.5 * (q1 + q3)
        } else {
            // the inner line closest to the middle of the box
            let mid = 0.5 * (q1 + q3);
            inner
                .iter()
                .copied()
                .min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()))
                .unwrap()
        };
        let min = line_values
            .iter()
            .copied()
            .filter(|v| *v < q1)
            .fold(q1, f64::min);
        let max = line_values
            .iter()
            .copied()
            .filter(|v| *v > q3)
            .fold(q3, f64::max);
        rows[s].push((
            tick,
            Record::Boxplot(FiveNumber::new(min, q1, median, q3, max)?),
        ));
    }
    finish(names, rows)
}

fn convert_points(
    img: &ImageBuffer,
    ann: &ChartAnnotation,
    det: &DetectionSet,
    opts: &ConvertOptions<'_>,
) -> Result<Vec<DataSeries>> {
    let x_scale = fit_axis_scale_or_piecewise(ann.axis(Orientation::Horizontal))?;
    let y_scale = fit_axis_scale_or_piecewise(ann.axis(Orientation::Vertical))?;
    let points = det.point_items();
    let half = opts.sigma + 0.5;
    let patches = points
        .iter()
        .enumerate()
        .map(|(i, p)| Ok((i, BoundingBox::around(*p, half)?)))
        .collect::<Result<Vec<_>>>()?;
    let owner = assign_series(img, ann, &patches, opts)?;
    let names = series_names(ann);
    let mut groups: Vec<Vec<Point2D>> = vec![Vec::new(); names.len()];
    for (p, &s) in points.iter().zip(&owner) {
        groups[s].push(*p);
    }
    names
        .into_iter()
        .zip(groups)
        .map(|(n, mut pts)| {
            pts.sort_by(|a, b| a.x().total_cmp(&b.x()).then(a.y().total_cmp(&b.y())));
            let records = pts
                .iter()
                .map(|p| Record::Numeric {
                    x: x_scale.pixel_to_value(p.x()),
                    y: y_scale.pixel_to_value(p.y()),
                })
                .collect();
            DataSeries::new(n, records)
        })
        .collect()
}
