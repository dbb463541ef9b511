//! Connected-component detectors for solid bars and scatter markers.
//!
//! Both detectors work inside the plot area only. The background color is the
//! most frequent color on the plot-area border; a pixel is foreground when any
//! channel deviates from it by more than `background_tolerance`. Thin
//! gridlines (runs of at most two rows or columns that are foreground across
//! the full plot width or height) are erased, the mask is opened with a 3x3
//! square and 8-connected components are extracted.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{BoundingBox, Point2D};
use crate::model::{DetectionSet, Scored};
use crate::raster::{self, Connectivity, ImageBuffer};

type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct BarDetectParams {
    pub background_tolerance: u8,
    pub min_area: usize,
    pub min_fill_ratio: f64,
    pub plot_bb: BoundingBox,
}

impl BarDetectParams {
    pub fn new(plot_bb: BoundingBox) -> Self {
        Self {
            background_tolerance: 12,
            min_area: 20,
            min_fill_ratio: 0.85,
            plot_bb,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointDetectParams {
    pub background_tolerance: u8,
    pub min_area: usize,
    pub max_area: usize,
    pub plot_bb: BoundingBox,
}

impl PointDetectParams {
    pub fn new(plot_bb: BoundingBox) -> Self {
        Self {
            background_tolerance: 12,
            min_area: 4,
            max_area: 400,
            plot_bb,
        }
    }
}

// Share of a component's pixels that must match its modal color.
const COLOR_DOMINANCE: f64 = 0.9;
const MAX_GRIDLINE_RUN: usize = 2;

fn close(a: Rgb, b: Rgb, tol: u8) -> bool {
    a.iter().zip(b).all(|(x, y)| x.abs_diff(y) <= tol)
}

/// Most frequent color; ties go to the smallest color value.
fn modal_color(colors: impl Iterator<Item = Rgb>) -> Option<Rgb> {
    let mut counts: HashMap<Rgb, usize> = HashMap::new();
    for c in colors {
        *counts.entry(c).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|(ca, na), (cb, nb)| na.cmp(nb).then(cb.cmp(ca)))
        .map(|(c, _)| c)
}

/// Foreground mask of the plot-area crop.
struct PlotMask {
    c0: usize,
    r0: usize,
    w: usize,
    h: usize,
    colors: Vec<Rgb>,
    mask: Vec<bool>,
}

impl PlotMask {
    fn build(img: &ImageBuffer, plot_bb: &BoundingBox, tol: u8) -> Result<Self> {
        if plot_bb.area() <= 0.0 {
            return Err(Error::invalid("plot_bb", "degenerate plot area"));
        }
        let (c0, r0, c1, r1) = plot_bb.pixel_span(img.width(), img.height());
        if c1 <= c0 || r1 <= r0 {
            return Err(Error::invalid(
                "plot_bb",
                "plot area lies outside the image",
            ));
        }
        let (w, h) = (c1 - c0, r1 - r0);
        let colors: Vec<Rgb> = (r0..r1)
            .flat_map(|y| (c0..c1).map(move |x| (x, y)))
            .map(|(x, y)| img.rgb(x, y))
            .collect();
        let border = (0..w)
            .flat_map(|x| [x, (h - 1) * w + x])
            .chain((0..h).flat_map(|y| [y * w, y * w + w - 1]))
            .map(|i| colors[i]);
        let bg = modal_color(border).expect("non-empty border");
        let mut mask: Vec<bool> = colors.iter().map(|&c| !close(c, bg, tol)).collect();
        // both directions are judged on the unerased mask, so crossing
        // gridlines do not hide each other
        let mut erase = gridline_pixels(&colors, &mask, w, h, tol, true);
        erase.extend(gridline_pixels(&colors, &mask, w, h, tol, false));
        for i in erase {
            mask[i] = false;
        }
        let mask = raster::open_mask(&mask, w, h, 1);
        Ok(Self {
            c0,
            r0,
            w,
            h,
            colors,
            mask,
        })
    }

    fn to_image_box(&self, b: &BoundingBox) -> BoundingBox {
        let (dx, dy) = (self.c0 as f64, self.r0 as f64);
        BoundingBox::new(b.x0() + dx, b.y0() + dy, b.x1() + dx, b.y1() + dy).expect("shifted box")
    }

    fn to_image_point(&self, p: &Point2D) -> Point2D {
        Point2D::new(p.x() + self.c0 as f64, p.y() + self.r0 as f64).expect("shifted point")
    }
}

// A line (row when `rows`, else column) spanning the whole crop with
// foreground is a gridline candidate; runs of consecutive candidates sharing
// one modal color are erased when at most MAX_GRIDLINE_RUN thick. The modal
// color skips pixels with that same color on both neighboring lines, which
// are the interiors of marks crossing the gridline.
fn gridline_pixels(
    colors: &[Rgb],
    mask: &[bool],
    w: usize,
    h: usize,
    tol: u8,
    rows: bool,
) -> Vec<usize> {
    let (lines, len) = if rows { (h, w) } else { (w, h) };
    let idx = |line: usize, pos: usize| if rows { line * w + pos } else { pos * w + line };
    let sandwiched = |l: usize, p: usize| {
        let c = colors[idx(l, p)];
        l > 0 && l + 1 < lines && colors[idx(l - 1, p)] == c && colors[idx(l + 1, p)] == c
    };
    let line_color: Vec<Option<Rgb>> = (0..lines)
        .map(|l| {
            if !(0..len).all(|p| mask[idx(l, p)]) {
                return None;
            }
            modal_color(
                (0..len)
                    .filter(|&p| !sandwiched(l, p))
                    .map(|p| colors[idx(l, p)]),
            )
            .or_else(|| modal_color((0..len).map(|p| colors[idx(l, p)])))
        })
        .collect();
    let mut out = Vec::new();
    let mut l = 0;
    while l < lines {
        let Some(color) = line_color[l] else {
            l += 1;
            continue;
        };
        let mut end = l + 1;
        while end < lines && line_color[end].is_some_and(|c| close(c, color, tol)) {
            end += 1;
        }
        if end - l <= MAX_GRIDLINE_RUN {
            for line in l..end {
                out.extend(
                    (0..len)
                        .map(|p| idx(line, p))
                        .filter(|&i| close(colors[i], color, tol)),
                );
            }
        }
        l = end;
    }
    out
}

/// Detects solid single-color rectangles. Each box is scored by its fill
/// ratio (component area over bounding-box area).
pub fn detect_bars(img: &ImageBuffer, p: &BarDetectParams, image_id: &str) -> Result<DetectionSet> {
    let pm = PlotMask::build(img, &p.plot_bb, p.background_tolerance)?;
    let lm = raster::label_mask(&pm.mask, pm.w, pm.h, Connectivity::Eight);
    let stats = raster::component_stats(&lm);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); stats.len()];
    for (i, &l) in lm.labels().iter().enumerate() {
        if l != 0 {
            members[l as usize - 1].push(i);
        }
    }
    let mut boxes = Vec::new();
    for (s, cells) in stats.iter().zip(&members) {
        if s.area < p.min_area {
            continue;
        }
        let modal = modal_color(cells.iter().map(|&i| pm.colors[i])).expect("non-empty component");
        let matching = cells
            .iter()
            .filter(|&&i| close(pm.colors[i], modal, p.background_tolerance))
            .count();
        if (matching as f64) < COLOR_DOMINANCE * s.area as f64 {
            continue;
        }
        let fill = s.area as f64 / s.bbox.area();
        if fill < p.min_fill_ratio {
            continue;
        }
        boxes.push(Scored::new(pm.to_image_box(&s.bbox), fill.min(1.0))?);
    }
    Ok(DetectionSet::boxes(image_id, boxes))
}

/// Detects markers as component centroids. Components above `max_area` still
/// yield a single centroid: touching markers cannot be told apart here.
pub fn detect_points(
    img: &ImageBuffer,
    p: &PointDetectParams,
    image_id: &str,
) -> Result<DetectionSet> {
    if p.min_area > p.max_area {
        return Err(Error::invalid("min_area", "exceeds max_area"));
    }
    let pm = PlotMask::build(img, &p.plot_bb, p.background_tolerance)?;
    let lm = raster::label_mask(&pm.mask, pm.w, pm.h, Connectivity::Eight);
    let kept: Vec<_> = raster::component_stats(&lm)
        .into_iter()
        .filter(|s| s.area >= p.min_area)
        .collect();
    let mut in_range: Vec<usize> = kept
        .iter()
        .map(|s| s.area)
        .filter(|&a| a <= p.max_area)
        .collect();
    in_range.sort_unstable();
    let median = match in_range.len() {
        0 => 0.0,
        n if n % 2 == 1 => in_range[n / 2] as f64,
        n => 0.5 * (in_range[n / 2 - 1] + in_range[n / 2]) as f64,
    };
    let points = kept
        .iter()
        .map(|s| {
            let score = 1.0 - (s.area as f64 - median).abs() / p.max_area.max(1) as f64;
            Scored::new(pm.to_image_point(&s.centroid), score.clamp(0.0, 1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(points
        .iter()
        .all(|q| q.item().x() < (pm.c0 + pm.w) as f64 && q.item().y() < (pm.r0 + pm.h) as f64));
    Ok(DetectionSet::points(image_id, points))
}
