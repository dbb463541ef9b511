use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{f_measure_at_iou, score_boxes, score_points, score_series, METRICS_VERSION};
use crate::geometry::BoundingBox;
use crate::model::{DetectionKind, DetectionSet};
use crate::series::DataSeries;

/// Scores of one image, or their means. Undefined fields stay `None`, e.g.
/// the IoU columns of point charts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ImageScores {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_iou_50: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_iou_70: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_iou_90: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s3: Option<f64>,
}

impl ImageScores {
    /// Fields in table column order.
    pub fn fields(&self) -> [Option<f64>; 7] {
        [
            self.f_iou_50,
            self.f_iou_70,
            self.f_iou_90,
            self.score_a,
            self.s1,
            self.s2,
            self.s3,
        ]
    }

    fn from_fields(f: [Option<f64>; 7]) -> Self {
        Self {
            f_iou_50: f[0],
            f_iou_70: f[1],
            f_iou_90: f[2],
            score_a: f[3],
            s1: f[4],
            s2: f[5],
            s3: f[6],
        }
    }
}

const COLUMNS: [&str; 7] = ["IoU=0.5", "IoU=0.7", "IoU=0.9", "Score_a", "s1", "s2", "s3"];

/// Scores one image. A missing prediction counts as an empty one; a
/// prediction of the wrong element kind scores as empty too.
pub fn evaluate_image(
    plot_bb: &BoundingBox,
    gt_detections: Option<&DetectionSet>,
    pred_detections: Option<&DetectionSet>,
    gt_series: Option<&[DataSeries]>,
    pred_series: Option<&[DataSeries]>,
    name_weight: f64,
) -> ImageScores {
    let mut s = ImageScores::default();
    if let Some(gt) = gt_detections {
        let pred = pred_detections.filter(|p| p.kind() == gt.kind());
        match gt.kind() {
            DetectionKind::Boxes => {
                let g = gt.box_items();
                let p = pred.map(|p| p.box_items()).unwrap_or_default();
                s.f_iou_50 = Some(f_measure_at_iou(&p, &g, 0.5));
                s.f_iou_70 = Some(f_measure_at_iou(&p, &g, 0.7));
                s.f_iou_90 = Some(f_measure_at_iou(&p, &g, 0.9));
                s.score_a = Some(score_boxes(&p, &g));
            }
            DetectionKind::Points => {
                let g = gt.point_items();
                let p = pred.map(|p| p.point_items()).unwrap_or_default();
                s.score_a = Some(score_points(&p, &g, plot_bb));
            }
        }
    }
    if let Some(gt) = gt_series {
        let r = score_series(pred_series.unwrap_or(&[]), gt, name_weight);
        s.s1 = Some(r.s1);
        s.s2 = Some(r.s2);
        s.s3 = Some(r.s3);
    }
    s
}

/// Per-image scores with their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: String,
    pub aggregate: ImageScores,
    pub per_image: BTreeMap<String, ImageScores>,
}

impl EvalReport {
    /// Each aggregate field is the mean over the images defining it.
    pub fn new(per_image: BTreeMap<String, ImageScores>) -> Self {
        let mut sums = [0.0; 7];
        let mut counts = [0usize; 7];
        for s in per_image.values() {
            for (k, v) in s.fields().iter().enumerate() {
                if let Some(v) = v {
                    sums[k] += v;
                    counts[k] += 1;
                }
            }
        }
        let mut mean = [None; 7];
        for k in 0..7 {
            if counts[k] > 0 {
                mean[k] = Some(sums[k] / counts[k] as f64);
            }
        }
        Self {
            metrics: METRICS_VERSION.to_string(),
            aggregate: ImageScores::from_fields(mean),
            per_image,
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self).map_err(|e| Error::Codec(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let r: Self =
            serde_json::from_slice(bytes).map_err(|e| Error::parse("report", e.to_string()))?;
        if r.metrics != METRICS_VERSION {
            return Err(Error::parse(
                "report.metrics",
                format!("unsupported metrics version {:?}", r.metrics),
            ));
        }
        Ok(r)
    }

    /// Fixed-width table, one row per image followed by the mean row.
    /// Scores print with two decimals and undefined ones as `-`.
    pub fn to_text_table(&self) -> String {
        let id_width = self
            .per_image
            .keys()
            .map(|k| k.chars().count())
            .chain(["image".len(), "mean".len()])
            .max()
            .unwrap_or(0);
        let mut out = format!("metrics: {}\n", self.metrics);
        let row = |out: &mut String, id: &str, cells: &[String]| {
            let _ = write!(out, "{id:<id_width$}");
            for c in cells {
                let _ = write!(out, "  {c:>8}");
            }
            out.push('\n');
        };
        let cells = |s: &ImageScores| -> Vec<String> {
            s.fields()
                .iter()
                .map(|v| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}")))
                .collect()
        };
        let header: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
        row(&mut out, "image", &header);
        for (id, s) in &self.per_image {
            row(&mut out, id, &cells(s));
        }
        row(&mut out, "mean", &cells(&self.aggregate));
        out
    }
}
