use crate::error::{Error, Result};

use super::features::FeatureVector;

fn squared_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest legend (L2 distance) for every element. Ties go to
/// the lowest legend index.
pub fn match_legends(elements: &[FeatureVector], legends: &[FeatureVector]) -> Result<Vec<usize>> {
    let first = legends
        .first()
        .ok_or_else(|| Error::invalid("legends", "at least one legend is required"))?;
    let (kind, dim) = (first.kind(), first.values().len());
    for v in legends.iter().chain(elements) {
        if v.kind() != kind {
            return Err(Error::KindMismatch(format!(
                "feature kinds {:?} and {:?}",
                kind,
                v.kind()
            )));
        }
        if v.values().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.values().len(),
            });
        }
    }
    Ok(elements
        .iter()
        .map(|e| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, l) in legends.iter().enumerate() {
                let d = squared_l2(e.values(), l.values());
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            best
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversion::features::FeatureKind;

    fn emb(v: &[f64]) -> FeatureVector {
        let mut vals = v.to_vec();
        vals.resize(128, 0.0);
        FeatureVector::new(FeatureKind::ExternalEmbedding, vals).unwrap()
    }

    #[test]
    fn exact_match_and_tie_break() {
        let legends = [emb(&[0.0, 0.0]), emb(&[1.0, 0.0]), emb(&[0.0, 2.0])];
        assert_eq!(
            match_legends(&[emb(&[1.0, 0.0])], &legends).unwrap(),
            vec![1]
        );
        // (0, 1) is at distance 1 from legends 0 and 2
        assert_eq!(
            match_legends(&[emb(&[0.0, 1.0])], &legends).unwrap(),
            vec![0]
        );
    }

    #[test]
    fn mismatched_vectors_rejected() {
        let hist = FeatureVector::new(FeatureKind::RgbHist, vec![0.0; 48]).unwrap();
        assert!(match_legends(&[hist], &[emb(&[0.0])]).is_err());
        assert!(match_legends(&[emb(&[0.0])], &[]).is_err());
    }
}
