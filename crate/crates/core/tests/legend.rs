use chartextract_core::conversion::{match_legends, FeatureKind, FeatureVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn embedding(rng: &mut ChaCha8Rng) -> FeatureVector {
    let v = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
    FeatureVector::new(FeatureKind::ExternalEmbedding, v).unwrap()
}

/// Plain Euclidean distance, first minimum wins.
fn nearest(e: &FeatureVector, legends: &[FeatureVector]) -> usize {
    let dist = |l: &FeatureVector| {
        e.values()
            .iter()
            .zip(l.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut best = 0;
    for j in 1..legends.len() {
        if dist(&legends[j]) < dist(&legends[best]) {
            best = j;
        }
    }
    best
}

#[test]
fn agrees_with_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let legends: Vec<_> = (0..rng.random_range(1..=6))
            .map(|_| embedding(&mut rng))
            .collect();
        let elements: Vec<_> = (0..rng.random_range(0..=8))
            .map(|_| embedding(&mut rng))
            .collect();
        let got = match_legends(&elements, &legends).unwrap();
        let want: Vec<_> = elements.iter().map(|e| nearest(e, &legends)).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn uniform_scaling_keeps_assignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let legends: Vec<_> = (0..4).map(|_| embedding(&mut rng)).collect();
        let elements: Vec<_> = (0..6).map(|_| embedding(&mut rng)).collect();
        let base = match_legends(&elements, &legends).unwrap();
        for f in [0.25, 3.0, 1000.0] {
            let l: Vec<_> = legends.iter().map(|v| v.scaled(f)).collect();
            let e: Vec<_> = elements.iter().map(|v| v.scaled(f)).collect();
            assert_eq!(match_legends(&e, &l).unwrap(), base);
        }
    }
}

#[test]
fn duplicate_legends_resolve_to_lowest_index() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let l = embedding(&mut rng);
    let e = embedding(&mut rng);
    assert_eq!(match_legends(&[e], &[l.clone(), l]).unwrap(), vec![0]);
}
