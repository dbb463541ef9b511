use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{serialize_annotation, serialize_detections, write_atomic};
use crate::model::{ChartType, ScaleKind};
use crate::raster::encode_image;
use crate::series::serialize_series_json;
use crate::synth::{generate, GenSpec, GeneratedChart};

/// Marker separation used for corpus scatter charts: radius-3 markers this
/// far apart never touch, so every 5x5 marker patch keeps a single color.
pub const CORPUS_MARKER_SEPARATION: f64 = 8.0;

/// Relative paths of one chart's files inside a corpus directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartPaths {
    pub image: String,
    pub annotation: String,
    pub detections: String,
    pub series: String,
}

pub fn chart_paths(id: &str) -> ChartPaths {
    ChartPaths {
        image: format!("images/{id}.png"),
        annotation: format!("annotations/{id}.json"),
        detections: format!("gt/{id}.detections.json"),
        series: format!("gt/{id}.series.json"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub chart_type: String,
    pub seed: u64,
    #[serde(flatten)]
    pub paths: ChartPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub base_seed: u64,
    pub count: usize,
    /// Charts per type, keyed by type name.
    pub counts: BTreeMap<String, usize>,
    pub charts: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut out = serde_json::to_vec_pretty(self).map_err(|e| Error::Codec(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        serde_path_to_error::deserialize(de)
            .map_err(|e| Error::parse(e.path().to_string(), e.inner().to_string()))
    }
}

/// Splits `count` among the weighted types by the largest-remainder method.
/// Remainder ties go to the type listed first. Returns types in input order.
pub fn apportion(count: usize, weights: &[(ChartType, f64)]) -> Result<Vec<(ChartType, usize)>> {
    if weights.is_empty() {
        return Err(Error::invalid("weights", "no chart types given"));
    }
    for (i, (t, w)) in weights.iter().enumerate() {
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::invalid(
                format!("weights.{t}"),
                "must be finite and >= 0",
            ));
        }
        if weights[..i].iter().any(|(u, _)| u == t) {
            return Err(Error::invalid(format!("weights.{t}"), "listed twice"));
        }
    }
    let total: f64 = weights.iter().map(|w| w.1).sum();
    if total <= 0.0 {
        return Err(Error::invalid("weights", "all weights are zero"));
    }
    let quotas: Vec<f64> = weights.iter().map(|w| count as f64 * w.1 / total).collect();
    let mut out: Vec<(ChartType, usize)> = weights
        .iter()
        .zip(&quotas)
        .map(|(w, q)| (w.0, q.floor() as usize))
        .collect();
    let assigned: usize = out.iter().map(|o| o.1).sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order.iter().take(count.saturating_sub(assigned)) {
        out[k].1 += 1;
    }
    Ok(out)
}

/// SplitMix64 output function, used to derive per-chart seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Randomized chart specs for a corpus, grouped by type in `weights` order.
pub fn corpus_specs(
    base_seed: u64,
    count: usize,
    weights: &[(ChartType, f64)],
) -> Result<Vec<GenSpec>> {
    let mut specs = Vec::with_capacity(count);
    for (chart_type, n) in apportion(count, weights)? {
        for _ in 0..n {
            let i = specs.len();
            let seed = splitmix64(base_seed.wrapping_add(i as u64));
            let mut spec = GenSpec::new(chart_type, seed);
            spec.image_id = format!("{chart_type}-{i:04}");
            // layout parameters come from a separate stream of the same seed
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            spec.n_series = rng.random_range(1..=3);
            spec.style.gridlines = rng.random_bool(0.5);
            let hi = [10.0, 50.0, 100.0, 500.0, 1000.0][rng.random_range(0..5)];
            spec.value_range = (0.0, hi);
            match chart_type {
                ChartType::BarVertical | ChartType::BarHorizontal => {
                    spec.n_items = rng.random_range(3..=8);
                }
                ChartType::BoxplotVertical | ChartType::BoxplotHorizontal => {
                    spec.n_items = rng.random_range(2..=5);
                }
                ChartType::Scatter | ChartType::Line => {
                    spec.n_items = if chart_type == ChartType::Scatter {
                        rng.random_range(5..=30)
                    } else {
                        rng.random_range(4..=12)
                    };
                    if rng.random_bool(0.2) {
                        spec.scale = ScaleKind::Exponential;
                        spec.value_range = (1.0, 10f64.powi(rng.random_range(2..=4)));
                    }
                    if chart_type == ChartType::Scatter {
                        spec.min_marker_separation = Some(CORPUS_MARKER_SEPARATION);
                    }
                }
            }
            specs.push(spec);
        }
    }
    Ok(specs)
}

/// Writes a chart's image and ground-truth files under `out_dir`.
pub fn write_chart(out_dir: &Path, chart: &GeneratedChart) -> Result<ChartPaths> {
    let paths = chart_paths(chart.annotation.image_id());
    write_atomic(&out_dir.join(&paths.image), &encode_image(&chart.image)?)?;
    write_atomic(
        &out_dir.join(&paths.annotation),
        &serialize_annotation(&chart.annotation)?,
    )?;
    write_atomic(
        &out_dir.join(&paths.detections),
        &serialize_detections(&chart.gt_detections)?,
    )?;
    write_atomic(
        &out_dir.join(&paths.series),
        &serialize_series_json(&chart.gt_series)?,
    )?;
    Ok(paths)
}

/// Generates `count` charts into `out_dir` in parallel and writes
/// `manifest.json` last.
pub fn generate_corpus(
    base_seed: u64,
    count: usize,
    weights: &[(ChartType, f64)],
    out_dir: &Path,
) -> Result<Manifest> {
    let specs = corpus_specs(base_seed, count, weights)?;
    for sub in ["images", "annotations", "gt"] {
        fs::create_dir_all(out_dir.join(sub))?;
    }
    let charts = specs
        .par_iter()
        .map(|spec| {
            let chart = generate(spec)?;
            let paths = write_chart(out_dir, &chart)?;
            Ok(ManifestEntry {
                id: spec.image_id.clone(),
                chart_type: spec.chart_type.as_str().to_string(),
                seed: spec.seed,
                paths,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts = BTreeMap::new();
    for c in &charts {
        *counts.entry(c.chart_type.clone()).or_insert(0) += 1;
    }
    let manifest = Manifest {
        base_seed,
        count,
        counts,
        charts,
    };
    write_atomic(&out_dir.join("manifest.json"), &manifest.to_json()?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportion_examples() {
        let a = apportion(10, &[(ChartType::BarVertical, 1.0)]).unwrap();
        assert_eq!(a, vec![(ChartType::BarVertical, 10)]);
        // quotas 3.33 each: the leftover goes to the first listed
        let a = apportion(
            10,
            &[
                (ChartType::BarVertical, 1.0),
                (ChartType::Scatter, 1.0),
                (ChartType::Line, 1.0),
            ],
        )
        .unwrap();
        assert_eq!(a.iter().map(|x| x.1).collect::<Vec<_>>(), [4, 3, 3]);
        assert!(apportion(5, &[(ChartType::Line, 0.0)]).is_err());
        assert!(apportion(5, &[(ChartType::Line, 1.0), (ChartType::Line, 2.0)]).is_err());
    }

    #[test]
    fn splitmix_reference_values() {
        // first outputs of the reference generator seeded with 0
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(0x9e37_79b9_7f4a_7c15), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn specs_are_reproducible() {
        let w = [(ChartType::BarVertical, 1.0), (ChartType::Scatter, 2.0)];
        let a = corpus_specs(7, 9, &w).unwrap();
        assert_eq!(a, corpus_specs(7, 9, &w).unwrap());
        assert_eq!(
            a.iter()
                .filter(|s| s.chart_type == ChartType::Scatter)
                .count(),
            6
        );
        assert_ne!(a, corpus_specs(8, 9, &w).unwrap());
    }

    #[test]
    fn corpus_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let w = [(ChartType::BarVertical, 1.0)];
        let m = generate_corpus(3, 4, &w, dir.path()).unwrap();
        assert_eq!(m.counts.get("bar-vertical"), Some(&4));
        for c in &m.charts {
            assert!(dir.path().join(&c.paths.image).is_file());
            assert!(dir.path().join(&c.paths.series).is_file());
        }
        let bytes = fs::read(dir.path().join("manifest.json")).unwrap();
        assert_eq!(Manifest::from_json(&bytes).unwrap(), m);
    }
}
