//! Pixel-to-value mappings fitted from axis ticks.

use crate::error::{Error, Result};
use crate::model::{Axis, ScaleKind};

/// Largest tolerated residual of a global fit, as a fraction of the tick span
/// in the fitted domain (values for linear, `log10` values for exponential).
pub const FIT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum AxisScale {
    /// `value = slope * pixel + intercept`
    Linear { slope: f64, intercept: f64 },
    /// `value = 10^(slope * pixel + intercept)`
    Exponential { slope: f64, intercept: f64 },
    /// Linear between adjacent knots `(pixel, value)`, sorted by pixel, and
    /// extrapolated from the outermost segments.
    Piecewise { knots: Vec<(f64, f64)> },
}

impl AxisScale {
    pub fn linear(slope: f64, intercept: f64) -> Result<Self> {
        check_coefficients(slope, intercept)?;
        Ok(AxisScale::Linear { slope, intercept })
    }

    pub fn exponential(slope: f64, intercept: f64) -> Result<Self> {
        check_coefficients(slope, intercept)?;
        Ok(AxisScale::Exponential { slope, intercept })
    }

    /// Piecewise-linear map through at least two knots with distinct pixels.
    pub fn piecewise(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.len() < 2 {
            return Err(Error::NoConsistentScale(
                "fewer than 2 numeric ticks".into(),
            ));
        }
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::NoConsistentScale("repeated tick pixel".into()));
        }
        Ok(AxisScale::Piecewise { knots })
    }

    pub fn kind(&self) -> Option<ScaleKind> {
        match self {
            AxisScale::Linear { .. } => Some(ScaleKind::Linear),
            AxisScale::Exponential { .. } => Some(ScaleKind::Exponential),
            AxisScale::Piecewise { .. } => None,
        }
    }

    pub fn pixel_to_value(&self, pixel: f64) -> f64 {
        match self {
            AxisScale::Linear { slope, intercept } => slope * pixel + intercept,
            AxisScale::Exponential { slope, intercept } => 10f64.powf(slope * pixel + intercept),
            AxisScale::Piecewise { knots } => {
                let seg = knots
                    .windows(2)
                    .position(|w| pixel <= w[1].0)
                    .unwrap_or(knots.len() - 2);
                let ((p0, v0), (p1, v1)) = (knots[seg], knots[seg + 1]);
                v0 + (pixel - p0) * (v1 - v0) / (p1 - p0)
            }
        }
    }
}

fn check_coefficients(slope: f64, intercept: f64) -> Result<()> {
    if !slope.is_finite() || !intercept.is_finite() {
        return Err(Error::invalid("scale", "non-finite coefficient"));
    }
    if slope == 0.0 {
        return Err(Error::invalid("scale", "slope must be non-zero"));
    }
    Ok(())
}

/// Least-squares line `y = a x + b` and its largest residual relative to the
/// span of `y`.
fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let span = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if span == 0.0 || a == 0.0 {
        return None;
    }
    let worst = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (a * x + b - y).abs())
        .fold(0.0, f64::max);
    Some((a, b, worst / span))
}

/// Fits a global linear or exponential map to the numeric ticks.
///
/// When the axis declares a scale only that model is tried. Otherwise both are
/// fitted and the one with the smaller relative residual wins, with linear
/// preferred whenever both fit within [`FIT_TOLERANCE`].
pub fn fit_axis_scale(axis: &Axis) -> Result<AxisScale> {
    let ticks = axis.numeric_ticks();
    if ticks.len() < 2 {
        return Err(Error::NoConsistentScale(format!(
            "{} numeric ticks, need at least 2",
            ticks.len()
        )));
    }
    let px: Vec<f64> = ticks.iter().map(|t| t.0).collect();
    let vals: Vec<f64> = ticks.iter().map(|t| t.1).collect();
    if px.iter().all(|&p| p == px[0]) {
        return Err(Error::NoConsistentScale("zero pixel spread".into()));
    }
    let linear = || fit_line(&px, &vals);
    let exponential = || {
        if vals.iter().all(|&v| v > 0.0) {
            let logs: Vec<f64> = vals.iter().map(|v| v.log10()).collect();
            fit_line(&px, &logs)
        } else {
            None
        }
    };
    let pick = |fit: Option<(f64, f64, f64)>, kind: ScaleKind| -> Option<(AxisScale, f64)> {
        let (a, b, r) = fit?;
        let s = match kind {
            ScaleKind::Linear => AxisScale::linear(a, b).ok()?,
            ScaleKind::Exponential => AxisScale::exponential(a, b).ok()?,
        };
        Some((s, r))
    };
    let candidates: Vec<(AxisScale, f64)> = match axis.scale() {
        Some(ScaleKind::Linear) => pick(linear(), ScaleKind::Linear).into_iter().collect(),
        Some(ScaleKind::Exponential) => pick(exponential(), ScaleKind::Exponential)
            .into_iter()
            .collect(),
        None => [
            pick(linear(), ScaleKind::Linear),
            pick(exponential(), ScaleKind::Exponential),
        ]
        .into_iter()
        .flatten()
        .collect(),
    };
    // Linear is listed first, so it wins whenever it passes.
    let best = candidates.into_iter().find(|(_, r)| *r <= FIT_TOLERANCE);
    best.map(|(s, _)| s).ok_or_else(|| {
        Error::NoConsistentScale(format!(
            "no linear or exponential model fits the ticks within {FIT_TOLERANCE}"
        ))
    })
}

/// [`fit_axis_scale`], falling back to piecewise-linear interpolation between
/// adjacent ticks when no global model fits.
pub fn fit_axis_scale_or_piecewise(axis: &Axis) -> Result<AxisScale> {
    match fit_axis_scale(axis) {
        Ok(s) => Ok(s),
        Err(Error::NoConsistentScale(reason)) => {
            let knots = axis.numeric_ticks();
            if knots.len() < 2 {
                return Err(Error::NoConsistentScale(reason));
            }
            AxisScale::piecewise(knots)
        }
        Err(e) => Err(e),
    }
}
