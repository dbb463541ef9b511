//! Gaussian keypoint heatmaps: label generation for point detectors and the
//! post-processing that turns a predicted heatmap back into points.
//!
//! A point `p` contributes `exp(-|c - p|^2 / (2 sigma^2))` to the cell whose
//! center is `c`. Overlapping contributions are combined with `max`, and the
//! kernel is truncated at `4 sigma`.

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2D};
use crate::raster::{self, Channels, Connectivity, ImageBuffer};

/// Single-channel mask with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("heatmap", "dimensions must be at least 1"));
        }
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: width * height,
                actual: values.len(),
            });
        }
        if !values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(Error::invalid("heatmap", "values must lie in [0, 1]"));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// 8-bit gray image with `round(255 * value)`.
    pub fn to_image(&self) -> ImageBuffer {
        let data = self
            .values
            .iter()
            .map(|v| (255.0 * v).round() as u8)
            .collect();
        ImageBuffer::new(self.width, self.height, Channels::Gray8, data).expect("sized buffer")
    }

    /// Reads `value / 255` from a gray image, e.g. an external network's output.
    pub fn from_image(img: &ImageBuffer) -> Self {
        let gray = raster::to_gray(img);
        Self {
            width: gray.width(),
            height: gray.height(),
            values: gray.data().iter().map(|&v| v as f64 / 255.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    sigma: f64,
}

impl GaussianParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Default for GaussianParams {
    fn default() -> Self {
        Self { sigma: 2.0 }
    }
}

/// Post-processing settings for [`decode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeParams {
    confidence_threshold: f64,
    plot_bb: Option<BoundingBox>,
    split_area_factor: f64,
    sigma: f64,
}

impl DecodeParams {
    pub fn new(
        confidence_threshold: f64,
        plot_bb: Option<BoundingBox>,
        split_area_factor: f64,
        gaussian: GaussianParams,
    ) -> Result<Self> {
        if !(confidence_threshold > 0.0 && confidence_threshold < 1.0) {
            return Err(Error::invalid("confidence_threshold", "must lie in (0, 1)"));
        }
        if !(split_area_factor > 1.0 && split_area_factor.is_finite()) {
            return Err(Error::invalid("split_area_factor", "must exceed 1"));
        }
        Ok(Self {
            confidence_threshold,
            plot_bb,
            split_area_factor,
            sigma: gaussian.sigma,
        })
    }

    pub fn with_plot_bb(mut self, plot_bb: Option<BoundingBox>) -> Self {
        self.plot_bb = plot_bb;
        self
    }

    pub fn confidence_threshold(&self) -> f64 {
        self.confidence_threshold
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Expected mask area of one isolated Gaussian: `pi * r^2` with
    /// `r = mask_radius(sigma, threshold)`.
    pub fn reference_area(&self) -> f64 {
        let r = mask_radius(self.sigma, self.confidence_threshold);
        std::f64::consts::PI * r * r
    }
}

impl Default for DecodeParams {
    fn default() -> Self {
        Self {
            confidence_threshold: 0.5,
            plot_bb: None,
            split_area_factor: 4.0,
            sigma: 2.0,
        }
    }
}

/// Radius of the level set `exp(-d^2 / (2 sigma^2)) = threshold`.
pub fn mask_radius(sigma: f64, threshold: f64) -> f64 {
    sigma * (2.0 * (1.0 / threshold).ln()).sqrt()
}

/// Renders unit-peak Gaussians at `points` onto a `width x height` grid.
pub fn encode(
    points: &[Point2D],
    width: usize,
    height: usize,
    params: &GaussianParams,
) -> Result<Heatmap> {
    let mut h = Heatmap::zeros(width, height)?;
    let sigma = params.sigma;
    let cutoff = 4.0 * sigma;
    let denom = 2.0 * sigma * sigma;
    for (i, p) in points.iter().enumerate() {
        if !(p.x() >= 0.0 && p.x() < width as f64 && p.y() >= 0.0 && p.y() < height as f64) {
            return Err(Error::invalid(
                format!("points[{i}]"),
                format!(
                    "({}, {}) lies outside the {width}x{height} canvas",
                    p.x(),
                    p.y()
                ),
            ));
        }
        let span = |c: f64, n: usize| {
            let lo = (c - cutoff - 0.5).floor().max(0.0) as usize;
            let hi = ((c + cutoff - 0.5).ceil().max(0.0) as usize).min(n - 1);
            lo..=hi
        };
        for row in span(p.y(), height) {
            let dy = row as f64 + 0.5 - p.y();
            for col in span(p.x(), width) {
                let dx = col as f64 + 0.5 - p.x();
                let d2 = dx * dx + dy * dy;
                if d2 > cutoff * cutoff {
                    continue;
                }
                let v = (-d2 / denom).exp();
                let cell = &mut h.values[row * width + col];
                if v > *cell {
                    *cell = v;
                }
            }
        }
    }
    Ok(h)
}

/// Extracts point locations from a heatmap.
///
/// Cells outside the plot area are ignored and the rest are thresholded into
/// 8-connected components. A component no larger than
/// `split_area_factor * reference_area` yields its value-weighted centroid.
/// Larger components, where several Gaussians have fused, yield
/// `k = round(area / reference_area)` points by repeatedly taking the hottest
/// remaining cell and suppressing a disc of radius `2 sigma` around it.
///
/// Output is sorted by `y`, then `x`.
pub fn decode(h: &Heatmap, params: &DecodeParams) -> Vec<Point2D> {
    let (w, ht) = (h.width, h.height);
    let mut values = h.values.clone();
    if let Some(bb) = params.plot_bb {
        for row in 0..ht {
            for col in 0..w {
                if !bb.contains(&Point2D::pixel_center(row, col)) {
                    values[row * w + col] = 0.0;
                }
            }
        }
    }
    let t = params.confidence_threshold;
    let mask: Vec<bool> = values.iter().map(|&v| v >= t).collect();
    let lm = raster::label_mask(&mask, w, ht, Connectivity::Eight);
    let n = lm.component_count() as usize;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &l) in lm.labels().iter().enumerate() {
        if l != 0 {
            members[l as usize - 1].push(i);
        }
    }

    let a_ref = params.reference_area();
    let split_limit = params.split_area_factor * a_ref;
    let suppress_r2 = (2.0 * params.sigma).powi(2);
    let center = |i: usize| Point2D::pixel_center(i / w, i % w);

    let mut out = Vec::new();
    for cells in &members {
        let area = cells.len() as f64;
        if area <= split_limit {
            let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
            for &i in cells {
                let c = center(i);
                sx += values[i] * c.x();
                sy += values[i] * c.y();
                sw += values[i];
            }
            out.push(Point2D::new(sx / sw, sy / sw).expect("finite centroid"));
            continue;
        }
        let k = ((area / a_ref).round() as usize).max(1);
        let mut remaining: Vec<(usize, f64)> = cells.iter().map(|&i| (i, values[i])).collect();
        for _ in 0..k {
            // hottest cell, first in raster order on ties
            let Some(&(peak, _)) = remaining.iter().filter(|(_, v)| *v > 0.0).fold(
                None,
                |best: Option<&(usize, f64)>, c| match best {
                    Some(b) if b.1 >= c.1 => Some(b),
                    _ => Some(c),
                },
            ) else {
                break;
            };
            let pc = center(peak);
            out.push(pc);
            for (i, v) in remaining.iter_mut() {
                let c = center(*i);
                let (dx, dy) = (c.x() - pc.x(), c.y() - pc.y());
                if dx * dx + dy * dy <= suppress_r2 {
                    *v = 0.0;
                }
            }
        }
    }
    out.sort_by(|a, b| a.y().total_cmp(&b.y()).then(a.x().total_cmp(&b.x())));
    out
}
