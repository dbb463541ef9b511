//! Connected-component labeling (two-pass, union-find).

use super::ImageBuffer;
use crate::geometry::{BoundingBox, Point2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

/// Per-pixel component labels. `0` is background; labels `1..=count` are
/// numbered in raster-scan order of each component's first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn component_count(&self) -> u32 {
        self.count
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let p = parent[x as usize];
        parent[x as usize] = parent[p as usize];
        x = p;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Labels a boolean foreground mask.
pub fn label_mask(mask: &[bool], width: usize, height: usize, conn: Connectivity) -> LabelMap {
    assert_eq!(mask.len(), width * height, "mask size");
    let mut provisional = vec![0u32; mask.len()];
    let mut parent: Vec<u32> = vec![0];
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if !mask[i] {
                continue;
            }
            // already-visited neighbours: W, and N row (NW, N, NE for 8-conn)
            let mut neigh = [0u32; 4];
            let mut n = 0;
            if x > 0 && provisional[i - 1] != 0 {
                neigh[n] = provisional[i - 1];
                n += 1;
            }
            if y > 0 {
                let up = i - width;
                if provisional[up] != 0 {
                    neigh[n] = provisional[up];
                    n += 1;
                }
                if conn == Connectivity::Eight {
                    if x > 0 && provisional[up - 1] != 0 {
                        neigh[n] = provisional[up - 1];
                        n += 1;
                    }
                    if x + 1 < width && provisional[up + 1] != 0 {
                        neigh[n] = provisional[up + 1];
                        n += 1;
                    }
                }
            }
            if n == 0 {
                let l = parent.len() as u32;
                parent.push(l);
                provisional[i] = l;
            } else {
                let l = *neigh[..n].iter().min().unwrap();
                provisional[i] = l;
                for &o in &neigh[..n] {
                    union(&mut parent, l, o);
                }
            }
        }
    }
    // Final labels by first appearance of each root in raster order.
    let mut remap = vec![0u32; parent.len()];
    let mut count = 0u32;
    let labels = provisional
        .iter()
        .map(|&p| {
            if p == 0 {
                return 0;
            }
            let root = find(&mut parent, p) as usize;
            if remap[root] == 0 {
                count += 1;
                remap[root] = count;
            }
            remap[root]
        })
        .collect();
    LabelMap {
        width,
        height,
        labels,
        count,
    }
}

/// Labels a binary image (non-zero = foreground).
pub fn label_components(img: &ImageBuffer, conn: Connectivity) -> LabelMap {
    label_mask(&img.to_mask(), img.width(), img.height(), conn)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    pub label: u32,
    pub area: usize,
    /// Tight box over the covered pixel squares.
    pub bbox: BoundingBox,
    /// Mean of member pixel centers.
    pub centroid: Point2D,
}

/// Area, bounding box and centroid of every component, indexed by `label - 1`.
pub fn component_stats(lm: &LabelMap) -> Vec<ComponentStats> {
    let n = lm.count as usize;
    let mut area = vec![0usize; n];
    let mut sx = vec![0f64; n];
    let mut sy = vec![0f64; n];
    let mut min_x = vec![usize::MAX; n];
    let mut min_y = vec![usize::MAX; n];
    let mut max_x = vec![0usize; n];
    let mut max_y = vec![0usize; n];
    for y in 0..lm.height {
        for x in 0..lm.width {
            let l = lm.labels[y * lm.width + x];
            if l == 0 {
                continue;
            }
            let k = l as usize - 1;
            area[k] += 1;
            sx[k] += x as f64 + 0.5;
            sy[k] += y as f64 + 0.5;
            min_x[k] = min_x[k].min(x);
            min_y[k] = min_y[k].min(y);
            max_x[k] = max_x[k].max(x);
            max_y[k] = max_y[k].max(y);
        }
    }
    (0..n)
        .map(|k| ComponentStats {
            label: k as u32 + 1,
            area: area[k],
            bbox: BoundingBox::new(
                min_x[k] as f64,
                min_y[k] as f64,
                max_x[k] as f64 + 1.0,
                max_y[k] as f64 + 1.0,
            )
            .expect("ordered corners"),
            centroid: Point2D::new(sx[k] / area[k] as f64, sy[k] / area[k] as f64)
                .expect("finite centroid"),
        })
        .collect()
}
