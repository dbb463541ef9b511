//! Data extraction for chart images.
//!
//! Box- and point-type plot elements are detected in chart rasters, assigned
//! to legend series by feature similarity, converted to values through axis
//! interpolation and scored against ground truth. A deterministic synthetic
//! chart generator supplies exact ground truth for every stage.

pub mod conversion;
pub mod detect;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod heatmap;
pub mod io;
pub mod model;
pub mod raster;
pub mod series;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{BoundingBox, Point2D};
pub use model::{
    Axis, ChartAnnotation, ChartType, DetectionKind, DetectionSet, Detections, LegendEntry,
    Orientation, ScaleKind, Scored, TickPoint,
};
pub use series::{DataSeries, FiveNumber, Record, RecordKind};
