use std::collections::BTreeMap;

use crate::eval::assignment;
use crate::series::{DataSeries, Record};

pub const DEFAULT_NAME_WEIGHT: f64 = 0.5;

/// Floor of the relative-error denominator, so a zero ground truth still
/// yields a finite error.
const EPSILON: f64 = 1e-9;

/// Share of the ground-truth x range within which continuous points match.
const X_MATCH_FRACTION: f64 = 0.02;

/// Small weight of the data score in the pairing cost, used only to break
/// ties between equally named pairings.
const TIE_BREAK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesScores {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

fn capped(pred: f64, gt: f64) -> f64 {
    (1.0 - (pred - gt).abs() / gt.abs().max(EPSILON)).max(0.0)
}

fn name_similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(a, b)
}

/// First value of each category.
fn category_values(rs: &[Record]) -> BTreeMap<&str, f64> {
    let mut m = BTreeMap::new();
    for r in rs {
        if let Record::Categorical { category, value } = r {
            m.entry(category.as_str()).or_insert(*value);
        }
    }
    m
}

fn categorical(pred: &[Record], gt: &[Record]) -> f64 {
    let (p, g) = (category_values(pred), category_values(gt));
    let mut union: Vec<&str> = p.keys().chain(g.keys()).copied().collect();
    union.sort_unstable();
    union.dedup();
    if union.is_empty() {
        return 1.0;
    }
    let sum: f64 = union
        .iter()
        .map(|c| match (p.get(c), g.get(c)) {
            (Some(&pv), Some(&gv)) => capped(pv, gv),
            _ => 0.0,
        })
        .sum();
    sum / union.len() as f64
}

fn numeric(rs: &[Record]) -> Vec<(f64, f64)> {
    rs.iter()
        .filter_map(|r| match r {
            Record::Numeric { x, y } => Some((*x, *y)),
            _ => None,
        })
        .collect()
}

fn continuous(pred: &[Record], gt: &[Record]) -> f64 {
    let (p, g) = (numeric(pred), numeric(gt));
    match (p.is_empty(), g.is_empty()) {
        (true, true) => return 1.0,
        (false, false) => {}
        _ => return 0.0,
    }
    let lo = g.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let hi = g.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let tol = X_MATCH_FRACTION * (hi - lo) + EPSILON * scale;
    // best y score among the points of `others` whose x lies within tol
    let best = |x: f64, score: &dyn Fn(f64) -> f64, others: &[(f64, f64)]| {
        others
            .iter()
            .filter(|o| (o.0 - x).abs() <= tol)
            .map(|o| score(o.1))
            .fold(0.0, f64::max)
    };
    let gt_side: f64 = g
        .iter()
        .map(|&(x, y)| best(x, &|py| capped(py, y), &p))
        .sum::<f64>()
        / g.len() as f64;
    let pred_side: f64 = p
        .iter()
        .map(|&(x, y)| best(x, &|gy| capped(y, gy), &g))
        .sum::<f64>()
        / p.len() as f64;
    0.5 * (gt_side + pred_side)
}

fn boxplot(pred: &[Record], gt: &[Record]) -> f64 {
    let n = pred.len().max(gt.len());
    if n == 0 {
        return 1.0;
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|pair| match pair {
            (Record::Boxplot(p), Record::Boxplot(g)) => {
                let (p, g) = (p.as_array(), g.as_array());
                (0..5).map(|k| capped(p[k], g[k])).sum::<f64>() / 5.0
            }
            _ => 0.0,
        })
        .sum();
    sum / n as f64
}

/// Data agreement of one paired series, in `[0, 1]`.
///
/// Categorical records score per category over the union of both sides,
/// numeric records by a symmetric nearest-x match, and boxplot records pair
/// by position. Series of different record kinds score 0.
pub fn series_data_score(pred: &DataSeries, gt: &DataSeries) -> f64 {
    use crate::series::RecordKind;
    match (pred.kind(), gt.kind()) {
        (None, None) => 1.0,
        (Some(a), Some(b)) if a != b => 0.0,
        (_, Some(RecordKind::Categorical)) | (Some(RecordKind::Categorical), None) => {
            categorical(pred.records(), gt.records())
        }
        (_, Some(RecordKind::Numeric)) | (Some(RecordKind::Numeric), None) => {
            continuous(pred.records(), gt.records())
        }
        _ => boxplot(pred.records(), gt.records()),
    }
}

/// Name score `s1`, data score `s2` and their blend `s3 = w s1 + (1-w) s2`.
///
/// Series are paired by the assignment maximizing total name similarity
/// (normalized Levenshtein). Unpaired series on either side count as 0.
///
/// # Panics
/// If `name_weight` is outside `[0, 1]`.
pub fn score_series(pred: &[DataSeries], gt: &[DataSeries], name_weight: f64) -> SeriesScores {
    assert!(
        (0.0..=1.0).contains(&name_weight),
        "name weight {name_weight} outside [0, 1]"
    );
    let n = pred.len().max(gt.len());
    let (s1, s2) = if n == 0 {
        (100.0, 100.0)
    } else {
        let mut names = Vec::with_capacity(pred.len() * gt.len());
        let mut data = Vec::with_capacity(pred.len() * gt.len());
        for p in pred {
            for g in gt {
                names.push(name_similarity(p.name(), g.name()));
                data.push(series_data_score(p, g));
            }
        }
        let costs: Vec<f64> = names
            .iter()
            .zip(&data)
            .map(|(s, d)| (1.0 - s) + TIE_BREAK * (1.0 - d))
            .collect();
        let pairs = assignment::assign(&costs, pred.len(), gt.len());
        let k = |&(i, j): &(usize, usize)| i * gt.len() + j;
        let s1: f64 = pairs.iter().map(|p| names[k(p)]).sum();
        let s2: f64 = pairs.iter().map(|p| data[k(p)]).sum();
        (100.0 * s1 / n as f64, 100.0 * s2 / n as f64)
    };
    SeriesScores {
        s1,
        s2,
        s3: name_weight * s1 + (1.0 - name_weight) * s2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::FiveNumber;

    fn cat(name: &str, vals: &[(&str, f64)]) -> DataSeries {
        let rs = vals
            .iter()
            .map(|&(c, v)| Record::Categorical {
                category: c.into(),
                value: v,
            })
            .collect();
        DataSeries::new(name, rs).unwrap()
    }

    fn num(name: &str, pts: &[(f64, f64)]) -> DataSeries {
        let rs = pts.iter().map(|&(x, y)| Record::Numeric { x, y }).collect();
        DataSeries::new(name, rs).unwrap()
    }

    #[test]
    fn identical_is_perfect() {
        let s = vec![
            cat("a", &[("x", 1.0), ("y", 0.0)]),
            num("b", &[(0.0, 1.0), (5.0, 2.0)]),
        ];
        let r = score_series(&s, &s, DEFAULT_NAME_WEIGHT);
        assert_eq!((r.s1, r.s2, r.s3), (100.0, 100.0, 100.0));
    }

    #[test]
    fn ten_percent_off() {
        let g = cat("a", &[("x", 10.0)]);
        let p = cat("a", &[("x", 11.0)]);
        assert!((series_data_score(&p, &g) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn missing_and_extra_categories() {
        let g = cat("a", &[("x", 1.0), ("y", 1.0)]);
        let p = cat("a", &[("x", 1.0), ("z", 1.0)]);
        // union {x, y, z}: only x scores
        assert!((series_data_score(&p, &g) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn continuous_match_window() {
        // gt x range 100, window 2
        let g = num("a", &[(0.0, 10.0), (100.0, 20.0)]);
        let p = num("a", &[(1.5, 10.0), (97.0, 20.0)]);
        // first pair matches both ways, second is 3 apart and matches neither
        assert!((series_data_score(&p, &g) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn boxplot_by_position() {
        let f = |m: f64| Record::Boxplot(FiveNumber::new(1.0, 2.0, m, 4.0, 5.0).unwrap());
        let g = DataSeries::new("a", vec![f(3.0), f(3.0)]).unwrap();
        let p = DataSeries::new("a", vec![f(3.3)]).unwrap();
        // first box: median 10% off gives 4.9/5; second missing
        assert!((series_data_score(&p, &g) - 0.49).abs() < 1e-12);
    }

    #[test]
    fn empty_against_nonempty() {
        let s = vec![cat("a", &[("x", 1.0)])];
        let r = score_series(&[], &s, 0.5);
        assert_eq!((r.s1, r.s2, r.s3), (0.0, 0.0, 0.0));
        let r = score_series(&s, &[], 0.5);
        assert_eq!((r.s1, r.s2, r.s3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn kind_mismatch_scores_zero() {
        assert_eq!(
            series_data_score(&num("a", &[(0.0, 1.0)]), &cat("a", &[("x", 1.0)])),
            0.0
        );
    }

    #[test]
    fn weight_blend() {
        let g = vec![cat("alpha", &[("x", 1.0)])];
        let p = vec![cat("alpha", &[("x", 0.5)])];
        let r = score_series(&p, &g, 0.25);
        assert_eq!(r.s1, 100.0);
        assert!((r.s2 - 50.0).abs() < 1e-12);
        assert!((r.s3 - 62.5).abs() < 1e-12);
    }
}
