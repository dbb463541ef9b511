//! Scoring of detections and extracted series against ground truth.
//!
//! All scores lie in `[0, 100]`. The formulas are this crate's own and are
//! tagged [`METRICS_VERSION`] in every report, so they are not confused with
//! any official leaderboard numbers.

pub mod assignment;
mod report;
mod series_score;

pub use report::{evaluate_image, EvalReport, ImageScores};
pub use series_score::{score_series, series_data_score, SeriesScores, DEFAULT_NAME_WEIGHT};

use crate::geometry::{BoundingBox, Point2D};

pub const METRICS_VERSION: &str = "ce-metrics-v1";

/// IoU thresholds of the F-measure columns.
pub const IOU_THRESHOLDS: [f64; 3] = [0.5, 0.7, 0.9];

/// Intersection over union; 0 when the union is empty.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b).map_or(0.0, |i| i.area());
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// One-to-one matching in descending IoU order. Pairs with zero overlap are
/// never matched. Ties go to the lower pred index, then the lower gt index.
/// Returns `(pred, gt, iou)` triples.
pub fn greedy_iou_matching(pred: &[BoundingBox], gt: &[BoundingBox]) -> Vec<(usize, usize, f64)> {
    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for (i, p) in pred.iter().enumerate() {
        for (j, g) in gt.iter().enumerate() {
            let v = iou(p, g);
            if v > 0.0 {
                pairs.push((i, j, v));
            }
        }
    }
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut pred_used = vec![false; pred.len()];
    let mut gt_used = vec![false; gt.len()];
    let mut out = Vec::new();
    for (i, j, v) in pairs {
        if !pred_used[i] && !gt_used[j] {
            pred_used[i] = true;
            gt_used[j] = true;
            out.push((i, j, v));
        }
    }
    out
}

/// F-measure (0..100) counting greedy matches with IoU >= `t` as true
/// positives. Both sides empty scores 100, exactly one empty scores 0.
pub fn f_measure_at_iou(pred: &[BoundingBox], gt: &[BoundingBox], t: f64) -> f64 {
    match (pred.is_empty(), gt.is_empty()) {
        (true, true) => return 100.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let tp = greedy_iou_matching(pred, gt)
        .iter()
        .filter(|m| m.2 >= t)
        .count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let p = tp / pred.len() as f64;
    let r = tp / gt.len() as f64;
    200.0 * p * r / (p + r)
}

/// Box detection score: summed IoU of greedy matches over the larger count.
pub fn score_boxes(pred: &[BoundingBox], gt: &[BoundingBox]) -> f64 {
    let n = pred.len().max(gt.len());
    if n == 0 {
        return 100.0;
    }
    let mass: f64 = greedy_iou_matching(pred, gt).iter().map(|m| m.2).sum();
    (100.0 * mass / n as f64).clamp(0.0, 100.0)
}

/// Distance normalizer for point scoring: 5% of the plot diagonal.
pub fn point_tolerance(plot_bb: &BoundingBox) -> f64 {
    0.05 * plot_bb.diagonal()
}

fn point_cost(a: &Point2D, b: &Point2D, tau: f64) -> f64 {
    let d = a.distance(b);
    if tau > 0.0 {
        (d / tau).min(1.0)
    } else if d == 0.0 {
        0.0
    } else {
        1.0
    }
}

/// Point detection score with capped distance cost `min(1, d / tau)` under
/// the minimum-cost assignment.
pub fn score_points(pred: &[Point2D], gt: &[Point2D], plot_bb: &BoundingBox) -> f64 {
    let n = pred.len().max(gt.len());
    if n == 0 {
        return 100.0;
    }
    let tau = point_tolerance(plot_bb);
    let costs: Vec<f64> = pred
        .iter()
        .flat_map(|p| gt.iter().map(move |g| point_cost(p, g, tau)))
        .collect();
    let pairs = assignment::assign(&costs, pred.len(), gt.len());
    let gain: f64 = pairs
        .iter()
        .map(|&(i, j)| 1.0 - costs[i * gt.len() + j])
        .sum();
    (100.0 * gain / n as f64).clamp(0.0, 100.0)
}
