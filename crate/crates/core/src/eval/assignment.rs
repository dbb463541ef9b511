//! Minimum-cost bipartite assignment.

/// Problems with more rows or columns than this are solved greedily.
pub const HUNGARIAN_LIMIT: usize = 512;

/// Minimum-cost one-to-one assignment over a dense `rows x cols` cost matrix
/// given in row-major order. Every row is assigned when `rows <= cols`,
/// otherwise every column. Returns `(row, col)` pairs sorted by row.
///
/// Uses the Hungarian method up to [`HUNGARIAN_LIMIT`] and the greedy
/// cheapest-pair-first rule above it.
pub fn assign(costs: &[f64], rows: usize, cols: usize) -> Vec<(usize, usize)> {
    assert_eq!(costs.len(), rows * cols, "cost matrix shape");
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    if rows.max(cols) > HUNGARIAN_LIMIT {
        log::warn!("assignment of {rows}x{cols} exceeds {HUNGARIAN_LIMIT}; using greedy matching");
        return greedy(costs, rows, cols);
    }
    hungarian(costs, rows, cols)
}

/// Hungarian method with row and column potentials, O(n^2 m) for n <= m.
pub fn hungarian(costs: &[f64], rows: usize, cols: usize) -> Vec<(usize, usize)> {
    if rows > cols {
        let mut t = vec![0.0; costs.len()];
        for r in 0..rows {
            for c in 0..cols {
                t[c * rows + r] = costs[r * cols + c];
            }
        }
        let mut pairs: Vec<_> = hungarian(&t, cols, rows)
            .into_iter()
            .map(|(c, r)| (r, c))
            .collect();
        pairs.sort_unstable();
        return pairs;
    }
    let (n, m) = (rows, cols);
    let a = |i: usize, j: usize| costs[(i - 1) * m + (j - 1)];
    // 1-based; index 0 is the virtual column used while growing a path.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0, j) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<_> = (1..=m)
        .filter(|&j| owner[j] != 0)
        .map(|j| (owner[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Repeatedly takes the cheapest pair whose row and column are both free.
/// Ties go to the lower row, then the lower column.
pub fn greedy(costs: &[f64], rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..rows * cols).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(a.cmp(&b)));
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut pairs = Vec::with_capacity(rows.min(cols));
    for k in order {
        let (r, c) = (k / cols, k % cols);
        if !row_used[r] && !col_used[c] {
            row_used[r] = true;
            col_used[c] = true;
            pairs.push((r, c));
        }
    }
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn total(costs: &[f64], cols: usize, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(r, c)| costs[r * cols + c]).sum()
    }

    /// Minimum over all injections of the smaller side into the larger.
    fn brute(costs: &[f64], rows: usize, cols: usize) -> f64 {
        fn rec(costs: &[f64], rows: usize, cols: usize, r: usize, used: &mut Vec<bool>) -> f64 {
            if r == rows {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for c in 0..cols {
                if !used[c] {
                    used[c] = true;
                    best = best.min(costs[r * cols + c] + rec(costs, rows, cols, r + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        if rows <= cols {
            rec(costs, rows, cols, 0, &mut vec![false; cols])
        } else {
            let mut t = vec![0.0; costs.len()];
            for r in 0..rows {
                for c in 0..cols {
                    t[c * rows + r] = costs[r * cols + c];
                }
            }
            rec(&t, cols, rows, 0, &mut vec![false; rows])
        }
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let costs: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
            let pairs = hungarian(&costs, rows, cols);
            assert_eq!(pairs.len(), rows.min(cols));
            let mut rs: Vec<_> = pairs.iter().map(|p| p.0).collect();
            let mut cs: Vec<_> = pairs.iter().map(|p| p.1).collect();
            rs.dedup();
            cs.sort_unstable();
            cs.dedup();
            assert_eq!(rs.len(), pairs.len());
            assert_eq!(cs.len(), pairs.len());
            let got = total(&costs, cols, &pairs);
            let want = brute(&costs, rows, cols);
            assert!((got - want).abs() < 1e-9, "{rows}x{cols}: {got} vs {want}");
        }
    }

    #[test]
    fn greedy_can_be_suboptimal() {
        // greedy takes (0,0)=0 and is forced into (1,1)=10; optimum is 1+1
        let costs = [0.0, 1.0, 1.0, 10.0];
        assert_eq!(greedy(&costs, 2, 2), vec![(0, 0), (1, 1)]);
        assert_eq!(hungarian(&costs, 2, 2), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn empty_sides() {
        assert!(assign(&[], 0, 3).is_empty());
        assert!(assign(&[], 4, 0).is_empty());
    }
}
