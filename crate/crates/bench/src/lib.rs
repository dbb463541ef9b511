//! Fixtures shared by the benchmarks under `benches/`.

use chartextract_core::synth::{generate, GenSpec, GeneratedChart};
use chartextract_core::ChartType;

/// A generated chart with default layout, panicking on invalid specs.
pub fn chart(chart_type: ChartType, seed: u64, n_series: usize, n_items: usize) -> GeneratedChart {
    let mut spec = GenSpec::new(chart_type, seed);
    spec.n_series = n_series;
    spec.n_items = n_items;
    generate(&spec).expect("valid benchmark spec")
}

/// Row-major cost matrix with entries in `[0, 1)` from a fixed LCG.
pub fn cost_matrix(rows: usize, cols: usize, seed: u64) -> Vec<f64> {
    let mut s = seed;
    (0..rows * cols)
        .map(|_| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
        .collect()
}
