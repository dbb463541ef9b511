//! Chart annotations and detector output.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2D};

/// Chart family, with orientation folded in for bars and boxplots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChartType {
    BarVertical,
    BarHorizontal,
    BoxplotVertical,
    BoxplotHorizontal,
    Scatter,
    Line,
}

impl ChartType {
    pub const ALL: [ChartType; 6] = [
        ChartType::BarVertical,
        ChartType::BarHorizontal,
        ChartType::BoxplotVertical,
        ChartType::BoxplotHorizontal,
        ChartType::Scatter,
        ChartType::Line,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ChartType::BarVertical => "bar-vertical",
            ChartType::BarHorizontal => "bar-horizontal",
            ChartType::BoxplotVertical => "boxplot-vertical",
            ChartType::BoxplotHorizontal => "boxplot-horizontal",
            ChartType::Scatter => "scatter",
            ChartType::Line => "line",
        }
    }

    /// Which kind of detector output describes this chart's elements.
    pub fn element_kind(&self) -> DetectionKind {
        match self {
            ChartType::BarVertical
            | ChartType::BarHorizontal
            | ChartType::BoxplotVertical
            | ChartType::BoxplotHorizontal => DetectionKind::Boxes,
            ChartType::Scatter | ChartType::Line => DetectionKind::Points,
        }
    }

    /// Orientation of the axis that carries values for bar and boxplot charts.
    pub fn value_orientation(&self) -> Orientation {
        match self {
            ChartType::BarHorizontal | ChartType::BoxplotHorizontal => Orientation::Horizontal,
            _ => Orientation::Vertical,
        }
    }
}

impl fmt::Display for ChartType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChartType {
    type Err = Error;

    /// Accepts the kebab-case names, plus `bar` and `boxplot` for the
    /// vertical variants.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bar" => return Ok(ChartType::BarVertical),
            "boxplot" => return Ok(ChartType::BoxplotVertical),
            _ => {}
        }
        ChartType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::invalid("chart_type", format!("unknown chart type {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
        }
    }

    /// The pixel coordinate that moves along an axis of this orientation.
    pub fn coordinate(&self, p: &Point2D) -> f64 {
        match self {
            Orientation::Horizontal => p.x(),
            Orientation::Vertical => p.y(),
        }
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "horizontal" => Ok(Orientation::Horizontal),
            "vertical" => Ok(Orientation::Vertical),
            _ => Err(Error::invalid(
                "orientation",
                format!("unknown orientation {s:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleKind {
    Linear,
    Exponential,
}

impl ScaleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScaleKind::Linear => "linear",
            ScaleKind::Exponential => "exponential",
        }
    }
}

impl FromStr for ScaleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(ScaleKind::Linear),
            "exponential" => Ok(ScaleKind::Exponential),
            _ => Err(Error::invalid("scale", format!("unknown scale {s:?}"))),
        }
    }
}

/// Parses the numeric content of a tick label.
///
/// Accepts decimal and scientific notation, surrounding `%` signs, leading
/// currency symbols and comma thousands separators. Returns `None` for
/// categorical labels and for anything that is not finite.
pub fn parse_tick_label(label: &str) -> Option<f64> {
    let mut s = label.trim();
    s = s.trim_start_matches('%').trim_end_matches('%').trim();
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => ("-", r),
        None => ("", s.strip_prefix('+').unwrap_or(s)),
    };
    let rest = rest.trim_start_matches(['$', '€', '£', '¥']).trim();
    if rest.is_empty() || rest.starts_with(['-', '+']) {
        return None;
    }
    let digits = strip_thousands(rest)?;
    if !digits
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'))
    {
        return None;
    }
    let v: f64 = format!("{sign}{digits}").parse().ok()?;
    v.is_finite().then_some(v)
}

fn strip_thousands(s: &str) -> Option<String> {
    if !s.contains(',') {
        return Some(s.to_string());
    }
    let int_end = s.find(['.', 'e', 'E']).unwrap_or(s.len());
    let (int_part, tail) = s.split_at(int_end);
    if tail.contains(',') {
        return None;
    }
    let groups: Vec<&str> = int_part.split(',').collect();
    let ok =
        !groups[0].is_empty() && groups[0].len() <= 3 && groups[1..].iter().all(|g| g.len() == 3);
    ok.then(|| format!("{}{}", groups.concat(), tail))
}

/// A labeled position on an axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TickPoint {
    pixel: Point2D,
    label: String,
    value: Option<f64>,
}

impl TickPoint {
    pub fn new(pixel: Point2D, label: impl Into<String>, value: Option<f64>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::invalid("tick.label", "empty label"));
        }
        if value.is_some_and(|v| !v.is_finite()) {
            return Err(Error::invalid("tick.value", "non-finite value"));
        }
        Ok(Self {
            pixel,
            label,
            value,
        })
    }

    /// Builds a tick whose value is parsed from its label.
    pub fn from_label(pixel: Point2D, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let value = parse_tick_label(&label);
        Self::new(pixel, label, value)
    }

    pub fn pixel(&self) -> Point2D {
        self.pixel
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self) -> Option<f64> {
        self.value
    }
}

/// An axis with its ticks ordered strictly along the axis direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    orientation: Orientation,
    ticks: Vec<TickPoint>,
    scale: Option<ScaleKind>,
}

impl Axis {
    /// Ticks may run in either direction but must be strictly monotone in the
    /// coordinate that matches `orientation`.
    pub fn new(
        orientation: Orientation,
        ticks: Vec<TickPoint>,
        scale: Option<ScaleKind>,
    ) -> Result<Self> {
        let coords: Vec<f64> = ticks
            .iter()
            .map(|t| orientation.coordinate(&t.pixel))
            .collect();
        let increasing = coords.windows(2).all(|w| w[0] < w[1]);
        let decreasing = coords.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::invalid("ticks", "ticks not strictly monotone"));
        }
        Ok(Self {
            orientation,
            ticks,
            scale,
        })
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn ticks(&self) -> &[TickPoint] {
        &self.ticks
    }

    pub fn scale(&self) -> Option<ScaleKind> {
        self.scale
    }

    /// `(pixel coordinate, value)` for every tick with a numeric value.
    pub fn numeric_ticks(&self) -> Vec<(f64, f64)> {
        self.ticks
            .iter()
            .filter_map(|t| t.value.map(|v| (self.orientation.coordinate(&t.pixel), v)))
            .collect()
    }

    pub fn tick_coordinate(&self, tick: &TickPoint) -> f64 {
        self.orientation.coordinate(&tick.pixel)
    }
}

/// A legend swatch and its series label.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendEntry {
    label: String,
    patch_bb: BoundingBox,
}

impl LegendEntry {
    pub fn new(label: impl Into<String>, patch_bb: BoundingBox) -> Result<Self> {
        if patch_bb.area() <= 0.0 {
            return Err(Error::invalid("legend.patch_bb", "swatch has zero area"));
        }
        Ok(Self {
            label: label.into(),
            patch_bb,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn patch_bb(&self) -> BoundingBox {
        self.patch_bb
    }
}

/// Everything known about a chart image before element detection: its type,
/// plot area, axes and legend.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartAnnotation {
    image_id: String,
    chart_type: ChartType,
    plot_bb: BoundingBox,
    x_axis: Axis,
    y_axis: Axis,
    legends: Vec<LegendEntry>,
}

impl ChartAnnotation {
    pub fn new(
        image_id: impl Into<String>,
        chart_type: ChartType,
        plot_bb: BoundingBox,
        x_axis: Axis,
        y_axis: Axis,
        legends: Vec<LegendEntry>,
    ) -> Result<Self> {
        if x_axis.orientation == y_axis.orientation {
            return Err(Error::invalid(
                "y_axis.orientation",
                "axes share one orientation",
            ));
        }
        Ok(Self {
            image_id: image_id.into(),
            chart_type,
            plot_bb,
            x_axis,
            y_axis,
            legends,
        })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn chart_type(&self) -> ChartType {
        self.chart_type
    }

    pub fn plot_bb(&self) -> BoundingBox {
        self.plot_bb
    }

    pub fn x_axis(&self) -> &Axis {
        &self.x_axis
    }

    pub fn y_axis(&self) -> &Axis {
        &self.y_axis
    }

    pub fn legends(&self) -> &[LegendEntry] {
        &self.legends
    }

    pub fn axis(&self, orientation: Orientation) -> &Axis {
        if self.x_axis.orientation == orientation {
            &self.x_axis
        } else {
            &self.y_axis
        }
    }

    /// Checks that the plot area fits inside a `width x height` image.
    pub fn check_image_bounds(&self, width: usize, height: usize) -> Result<()> {
        let image = BoundingBox::new(0.0, 0.0, width as f64, height as f64)?;
        if !image.contains_box(&self.plot_bb) {
            return Err(Error::invalid("plot_bb", "plot area exceeds image bounds"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectionKind {
    Boxes,
    Points,
}

impl DetectionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectionKind::Boxes => "boxes",
            DetectionKind::Points => "points",
        }
    }
}

impl FromStr for DetectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boxes" => Ok(DetectionKind::Boxes),
            "points" => Ok(DetectionKind::Points),
            _ => Err(Error::invalid(
                "kind",
                format!("unknown detection kind {s:?}"),
            )),
        }
    }
}

/// A detected item paired with a confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored<T> {
    item: T,
    score: f64,
}

impl<T> Scored<T> {
    pub fn new(item: T, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::invalid(
                "score",
                format!("score out of range: {score}"),
            ));
        }
        Ok(Self { item, score })
    }

    pub fn item(&self) -> &T {
        &self.item
    }

    pub fn score(&self) -> f64 {
        self.score
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detections {
    Boxes(Vec<Scored<BoundingBox>>),
    Points(Vec<Scored<Point2D>>),
}

/// Detector output for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionSet {
    image_id: String,
    detections: Detections,
}

impl DetectionSet {
    pub fn new(image_id: impl Into<String>, detections: Detections) -> Self {
        Self {
            image_id: image_id.into(),
            detections,
        }
    }

    pub fn boxes(image_id: impl Into<String>, boxes: Vec<Scored<BoundingBox>>) -> Self {
        Self::new(image_id, Detections::Boxes(boxes))
    }

    pub fn points(image_id: impl Into<String>, points: Vec<Scored<Point2D>>) -> Self {
        Self::new(image_id, Detections::Points(points))
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn kind(&self) -> DetectionKind {
        match self.detections {
            Detections::Boxes(_) => DetectionKind::Boxes,
            Detections::Points(_) => DetectionKind::Points,
        }
    }

    pub fn detections(&self) -> &Detections {
        &self.detections
    }

    pub fn len(&self) -> usize {
        match &self.detections {
            Detections::Boxes(b) => b.len(),
            Detections::Points(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Box geometry, empty for point sets.
    pub fn box_items(&self) -> Vec<BoundingBox> {
        match &self.detections {
            Detections::Boxes(b) => b.iter().map(|s| s.item).collect(),
            Detections::Points(_) => Vec::new(),
        }
    }

    /// Point geometry, empty for box sets.
    pub fn point_items(&self) -> Vec<Point2D> {
        match &self.detections {
            Detections::Points(p) => p.iter().map(|s| s.item).collect(),
            Detections::Boxes(_) => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y).unwrap()
    }

    #[test]
    fn tick_labels_parse() {
        assert_eq!(parse_tick_label("1e3"), Some(1000.0));
        assert_eq!(parse_tick_label(" 10 "), Some(10.0));
        assert_eq!(parse_tick_label("-2.5"), Some(-2.5));
        assert_eq!(parse_tick_label("$1,250.5"), Some(1250.5));
        assert_eq!(parse_tick_label("-$3"), Some(-3.0));
        assert_eq!(parse_tick_label("45%"), Some(45.0));
        assert_eq!(parse_tick_label("0.01"), Some(0.01));
        assert_eq!(parse_tick_label("C12"), None);
        assert_eq!(parse_tick_label("inf"), None);
        assert_eq!(parse_tick_label("NaN"), None);
        assert_eq!(parse_tick_label("1,23"), None);
        assert_eq!(parse_tick_label("2019"), Some(2019.0));
        assert_eq!(parse_tick_label(""), None);
    }

    #[test]
    fn axis_accepts_either_direction() {
        let t = |y: f64, l: &str| TickPoint::from_label(p(0.0, y), l).unwrap();
        let axis = Axis::new(
            Orientation::Vertical,
            vec![t(200.0, "0"), t(100.0, "10")],
            None,
        )
        .unwrap();
        assert_eq!(axis.numeric_ticks(), vec![(200.0, 0.0), (100.0, 10.0)]);
        assert!(Axis::new(
            Orientation::Vertical,
            vec![t(100.0, "0"), t(200.0, "10")],
            None
        )
        .is_ok());
    }

    #[test]
    fn duplicate_tick_positions_rejected() {
        let t = |y: f64, l: &str| TickPoint::from_label(p(0.0, y), l).unwrap();
        let err = Axis::new(
            Orientation::Vertical,
            vec![t(100.0, "0"), t(100.0, "10")],
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("ticks not strictly monotone"));
        let err = Axis::new(
            Orientation::Vertical,
            vec![t(100.0, "0"), t(200.0, "10"), t(150.0, "5")],
            None,
        )
        .unwrap_err();
        assert!(err.to_string().contains("ticks not strictly monotone"));
    }

    #[test]
    fn chart_type_round_trips_and_rejects_unknown() {
        for t in ChartType::ALL {
            assert_eq!(t.as_str().parse::<ChartType>().unwrap(), t);
        }
        assert!("pie".parse::<ChartType>().is_err());
    }

    #[test]
    fn scores_outside_unit_interval_rejected() {
        let err = Scored::new(p(1.0, 1.0), 1.2).unwrap_err();
        assert!(err.to_string().contains("score out of range"));
        assert!(Scored::new(p(1.0, 1.0), f64::NAN).is_err());
    }

    #[test]
    fn annotation_requires_distinct_axes() {
        let a = Axis::new(Orientation::Horizontal, vec![], None).unwrap();
        let bb = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        assert!(ChartAnnotation::new("x", ChartType::Scatter, bb, a.clone(), a, vec![]).is_err());
    }
}
