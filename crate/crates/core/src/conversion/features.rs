//! Color-histogram features and externally computed embeddings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::raster::ImageBuffer;

pub const BINS: usize = 16;
pub const HIST_LEN: usize = 3 * BINS;
pub const EMBEDDING_LEN: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    /// 16 bins per R, G, B channel, each channel L1-normalized.
    RgbHist,
    /// 16 bins per H (over [0, 360)), S and V channel, each L1-normalized.
    HsvHist,
    /// `RgbHist` followed by `HsvHist`.
    Concat,
    /// 128-dimensional vector produced outside this crate.
    ExternalEmbedding,
}

impl FeatureKind {
    pub fn dimension(&self) -> usize {
        match self {
            FeatureKind::RgbHist | FeatureKind::HsvHist => HIST_LEN,
            FeatureKind::Concat => 2 * HIST_LEN,
            FeatureKind::ExternalEmbedding => EMBEDDING_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    kind: FeatureKind,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(kind: FeatureKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != kind.dimension() {
            return Err(Error::DimensionMismatch {
                expected: kind.dimension(),
                actual: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("feature", "non-finite component"));
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Same kind with every component multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            kind: self.kind,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Standard RGB to HSV: hue in degrees `[0, 360)`, saturation and value in
/// `[0, 1]`.
pub fn rgb_to_hsv([r, g, b]: [u8; 3]) -> (f64, f64, f64) {
    let (r, g, b) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    (h.rem_euclid(360.0), s, max)
}

fn bin(unit: f64) -> usize {
    ((unit * BINS as f64) as usize).min(BINS - 1)
}

fn normalize(hist: &mut [f64], n: usize) {
    for v in hist {
        *v /= n as f64;
    }
}

/// Histogram feature over the pixels overlapping `patch`.
pub fn extract_feature(
    img: &ImageBuffer,
    patch: &BoundingBox,
    kind: FeatureKind,
) -> Result<FeatureVector> {
    if kind == FeatureKind::ExternalEmbedding {
        return Err(Error::invalid(
            "feature kind",
            "external embeddings are loaded, not computed",
        ));
    }
    let (c0, r0, c1, r1) = patch.pixel_span(img.width(), img.height());
    let n = (c1 - c0) * (r1 - r0);
    if n == 0 {
        return Err(Error::invalid(
            "patch",
            "patch does not intersect the image",
        ));
    }
    let mut rgb = vec![0.0; HIST_LEN];
    let mut hsv = vec![0.0; HIST_LEN];
    for y in r0..r1 {
        for x in c0..c1 {
            let px = img.rgb(x, y);
            for (c, &v) in px.iter().enumerate() {
                rgb[c * BINS + bin(v as f64 / 256.0)] += 1.0;
            }
            let (h, s, v) = rgb_to_hsv(px);
            hsv[bin(h / 360.0)] += 1.0;
            hsv[BINS + bin(s)] += 1.0;
            hsv[2 * BINS + bin(v)] += 1.0;
        }
    }
    normalize(&mut rgb, n);
    normalize(&mut hsv, n);
    let values = match kind {
        FeatureKind::RgbHist => rgb,
        FeatureKind::HsvHist => hsv,
        FeatureKind::Concat => [rgb, hsv].concat(),
        FeatureKind::ExternalEmbedding => unreachable!(),
    };
    FeatureVector::new(kind, values)
}

/// Reads `patch-id<TAB>v1,v2,...,v128` lines. Blank lines are skipped.
pub fn load_embeddings(bytes: &[u8]) -> Result<BTreeMap<String, FeatureVector>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("embeddings", e.to_string()))?;
    let mut out = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let path = format!("line {}", ln + 1);
        let (id, vals) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&path, "expected patch-id<TAB>values"))?;
        let values = vals
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::parse(&path, e.to_string()))?;
        let fv = FeatureVector::new(FeatureKind::ExternalEmbedding, values)
            .map_err(|e| Error::parse(&path, e.to_string()))?;
        if out.insert(id.to_string(), fv).is_some() {
            return Err(Error::parse(path, format!("duplicate patch id {id:?}")));
        }
    }
    Ok(out)
}

pub fn write_embeddings(map: &BTreeMap<String, FeatureVector>) -> Vec<u8> {
    let mut s = String::new();
    for (id, fv) in map {
        let vals: Vec<String> = fv.values.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "{id}\t{}", vals.join(","));
    }
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Channels;
    use proptest::prelude::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn pure_red_patch() {
        let img = ImageBuffer::filled(8, 8, Channels::Rgb8, &[255, 0, 0]).unwrap();
        let f = extract_feature(&img, &bb(0.0, 0.0, 8.0, 8.0), FeatureKind::RgbHist).unwrap();
        let v = f.values();
        assert_eq!(v[BINS - 1], 1.0);
        assert_eq!(v[BINS], 1.0); // green all in bin 0
        assert_eq!(v[2 * BINS], 1.0); // blue all in bin 0
        assert_eq!(v.iter().sum::<f64>(), 3.0);
        assert!(v[BINS + 1..2 * BINS].iter().all(|&x| x == 0.0));
        assert!(v[2 * BINS + 1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn half_red_half_blue() {
        let mut img = ImageBuffer::filled(4, 2, Channels::Rgb8, &[255, 0, 0]).unwrap();
        for y in 0..2 {
            for x in 2..4 {
                img.set_pixel(x, y, &[0, 0, 255]);
            }
        }
        let f = extract_feature(&img, &bb(0.0, 0.0, 4.0, 2.0), FeatureKind::RgbHist).unwrap();
        let v = f.values();
        // counting: 4 red pixels and 4 blue pixels out of 8
        assert_eq!((v[0], v[BINS - 1]), (0.5, 0.5));
        assert_eq!(v[BINS], 1.0);
        assert_eq!((v[2 * BINS], v[3 * BINS - 1]), (0.5, 0.5));

        let f = extract_feature(&img, &bb(0.0, 0.0, 4.0, 2.0), FeatureKind::HsvHist).unwrap();
        let v = f.values();
        // red hue 0 -> bin 0, blue hue 240 -> bin 10
        assert_eq!((v[0], v[10]), (0.5, 0.5));
        assert_eq!(v[2 * BINS - 1], 1.0); // saturation 1
        assert_eq!(v[3 * BINS - 1], 1.0); // value 1
    }

    #[test]
    fn one_pixel_patch_and_concat_length() {
        let img = ImageBuffer::filled(3, 3, Channels::Rgb8, &[10, 200, 30]).unwrap();
        let f = extract_feature(&img, &bb(1.0, 1.0, 2.0, 2.0), FeatureKind::Concat).unwrap();
        assert_eq!(f.values().len(), 2 * HIST_LEN);
        assert_eq!(f.values().iter().sum::<f64>(), 6.0);
    }

    #[test]
    fn patch_outside_image_is_an_error() {
        let img = ImageBuffer::filled(3, 3, Channels::Rgb8, &[0, 0, 0]).unwrap();
        assert!(extract_feature(&img, &bb(10.0, 10.0, 12.0, 12.0), FeatureKind::RgbHist).is_err());
        assert!(extract_feature(
            &img,
            &bb(0.0, 0.0, 1.0, 1.0),
            FeatureKind::ExternalEmbedding
        )
        .is_err());
    }

    #[test]
    fn hsv_reference_colors() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), (0.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 255, 0]), (120.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 0, 255]), (240.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([255, 0, 255]), (300.0, 1.0, 1.0));
        assert_eq!(rgb_to_hsv([0, 0, 0]), (0.0, 0.0, 0.0));
        let (h, s, v) = rgb_to_hsv([128, 128, 128]);
        assert_eq!((h, s), (0.0, 0.0));
        assert!((v - 128.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn embeddings_file() {
        let row = |id: &str, n: usize| {
            let vals: Vec<String> = (0..n).map(|i| format!("{}", i as f64 * 0.5)).collect();
            format!("{id}\t{}\n", vals.join(","))
        };
        let text = row("img/legend-0", 128) + &row("img/element-0", 128);
        let map = load_embeddings(text.as_bytes()).unwrap();
        assert_eq!(map.len(), 2);

        let bad = row("a", 128) + &row("b", 64);
        let err = load_embeddings(bad.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(err.to_string().contains("128"), "{err}");
    }

    proptest! {
        #[test]
        fn embeddings_round_trip(rows in prop::collection::btree_map("[a-z0-9/_-]{1,10}", prop::collection::vec(-1e3f64..1e3, 128), 0..5)) {
            let map: BTreeMap<String, FeatureVector> = rows
                .into_iter()
                .map(|(k, v)| (k, FeatureVector::new(FeatureKind::ExternalEmbedding, v).unwrap()))
                .collect();
            prop_assert_eq!(load_embeddings(&write_embeddings(&map)).unwrap(), map);
        }
    }
}
