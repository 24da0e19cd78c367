use std::collections::BTreeMap;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sq_dist};

/// Within-cluster sums of squares `(Euclidean, cosine)`; `memberships`
/// are 0-based indices into `centroids`.
pub fn wcss(x: &DataMatrix, memberships: &[usize], centroids: &[Vec<f64>]) -> Result<(f64, f64)> {
    if memberships.len() != x.n() {
        return Err(Error::DimensionMismatch { expected: x.n(), got: memberships.len() });
    }
    let (mut euc, mut cos) = (0.0, 0.0);
    for (row, &m) in x.rows().zip(memberships) {
        let c = centroids.get(m).ok_or_else(|| Error::InvalidArgument(format!("membership {m} has no centroid")))?;
        euc += sq_dist(row, c);
        let nc = norm(c);
        if nc > 0.0 {
            cos += 1.0 - dot(row, c) / nc;
        }
    }
    Ok((euc, cos))
}

fn choose2(v: u64) -> f64 {
    (v * v.saturating_sub(1)) as f64 / 2.0
}

fn contingency<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> BTreeMap<(A, B), u64> {
    let mut t = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *t.entry((x, y)).or_insert(0) += 1;
    }
    t
}

fn counts<T: Ord + Copy>(v: &[T]) -> BTreeMap<T, u64> {
    let mut c = BTreeMap::new();
    for &x in v {
        *c.entry(x).or_insert(0) += 1;
    }
    c
}

/// Adjusted Rand index from pair counts. When both partitions are trivial
/// in the same way (zero expected-adjusted range) the index is 1 if they
/// agree and 0 otherwise.
pub fn adjusted_rand_index<A: Ord + Copy, B: Ord + Copy>(a: &[A], b: &[B]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let n = a.len() as u64;
    let index: f64 = contingency(a, b).values().map(|&v| choose2(v)).sum();
    let sa: f64 = counts(a).values().map(|&v| choose2(v)).sum();
    let sb: f64 = counts(b).values().map(|&v| choose2(v)).sum();
    let total = choose2(n);
    let expected = if total > 0.0 { sa * sb / total } else { 0.0 };
    let max = 0.5 * (sa + sb);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(if index == sa && index == sb { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

/// For each cluster, the share of members whose nearest neighbour by
/// cosine similarity (self excluded) lies in the same cluster. `None` for
/// clusters with fewer than two members.
pub fn in_group_proportion(x: &DataMatrix, memberships: &[usize]) -> Result<Vec<Option<f64>>> {
    if memberships.len() != x.n() {
        return Err(Error::DimensionMismatch { expected: x.n(), got: memberships.len() });
    }
    let k = memberships.iter().max().map_or(0, |m| m + 1);
    let norms: Vec<f64> = x.rows().map(norm).collect();
    let mut same = vec![0usize; k];
    let mut size = vec![0usize; k];
    for i in 0..x.n() {
        size[memberships[i]] += 1;
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for j in 0..x.n() {
            if j != i {
                let s = dot(x.row(i), x.row(j)) / (norms[i] * norms[j]);
                if s > best.0 {
                    best = (s, j);
                }
            }
        }
        if best.1 != usize::MAX && memberships[best.1] == memberships[i] {
            same[memberships[i]] += 1;
        }
    }
    Ok((0..k).map(|c| (size[c] >= 2).then(|| same[c] as f64 / size[c] as f64)).collect())
}

/// Maximum-weight one-to-one assignment on a rectangular weight matrix.
/// Returns, for each row, the matched column if any.
pub fn max_weight_matching(w: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    let n = rows.max(cols);
    if n == 0 {
        return Vec::new();
    }
    let maxw = w.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
    let cost = |i: usize, j: usize| if i < rows && j < cols { maxw - w[i][j] } else { maxw };
    // Shortest augmenting path Hungarian method with potentials, 1-based.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; rows];
    for j in 1..=n {
        let i = p[j];
        if i >= 1 && i <= rows && j <= cols {
            out[i - 1] = Some(j - 1);
        }
    }
    out
}

/// Macro-averaged precision (over clusters) and recall (over classes)
/// after optimal one-to-one matching of clusters to classes. Unmatched
/// clusters score zero precision; unmatched classes zero recall.
pub fn macro_precision_recall<A: Ord + Copy, B: Ord + Copy>(truth: &[A], memberships: &[B]) -> Result<(f64, f64)> {
    if truth.len() != memberships.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: memberships.len() });
    }
    let classes: Vec<A> = counts(truth).keys().copied().collect();
    let class_sizes: Vec<u64> = counts(truth).values().copied().collect();
    let clusters: Vec<B> = counts(memberships).keys().copied().collect();
    let cluster_sizes: Vec<u64> = counts(memberships).values().copied().collect();
    let table = contingency(memberships, truth);
    let w: Vec<Vec<f64>> = clusters
        .iter()
        .map(|k| classes.iter().map(|c| *table.get(&(*k, *c)).unwrap_or(&0) as f64).collect())
        .collect();
    let matching = max_weight_matching(&w);
    let mut precision = 0.0;
    let mut recall = 0.0;
    for (ki, m) in matching.iter().enumerate() {
        if let Some(ci) = *m {
            precision += w[ki][ci] / cluster_sizes[ki] as f64;
            recall += w[ki][ci] / class_sizes[ci] as f64;
        }
    }
    Ok((precision / clusters.len() as f64, recall / classes.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ari_trivial_cases() {
        let a = [1, 1, 2, 2, 3];
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0; 5], &a).unwrap(), 0.0);
        assert!(adjusted_rand_index(&[1, 2], &[1]).is_err());
    }

    #[test]
    fn ari_two_by_two_table() {
        // Contingency [[2, 1], [1, 2]].
        let a = [0, 0, 0, 1, 1, 1];
        let b = [0, 0, 1, 0, 1, 1];
        let index = 1.0 + 0.0 + 0.0 + 1.0;
        let (sa, sb, total) = (6.0, 6.0, 15.0);
        let expect = (index - sa * sb / total) / (0.5 * (sa + sb) - sa * sb / total);
        assert!((adjusted_rand_index(&a, &b).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn wcss_hand_example() {
        let x = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let c = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let (e, s) = wcss(&x, &[0, 0, 1, 1], &c).unwrap();
        assert!((e - 4.0).abs() < 1e-15);
        assert!((s - 2.0).abs() < 1e-15);
        let (e, s) = wcss(&x, &[0, 1, 2, 3], &x.to_rows()).unwrap();
        assert_eq!((e, s), (0.0, 0.0));
    }

    #[test]
    fn macro_metrics() {
        let truth = [1, 1, 2, 2, 3, 3, 4, 4];
        assert_eq!(macro_precision_recall(&truth, &[7, 7, 5, 5, 6, 6, 9, 9]).unwrap(), (1.0, 1.0));
        let (p, r) = macro_precision_recall(&truth, &[0; 8]).unwrap();
        assert!((p - 0.25).abs() < 1e-15 && (r - 0.25).abs() < 1e-15);
    }

    #[test]
    fn matching_rectangular() {
        let w = vec![vec![1.0, 5.0, 0.0], vec![4.0, 6.0, 0.0]];
        assert_eq!(max_weight_matching(&w), vec![Some(1), Some(0)]);
        let tall = vec![vec![3.0], vec![4.0], vec![1.0]];
        assert_eq!(max_weight_matching(&tall), vec![None, Some(0), None]);
    }

    #[test]
    fn igp_separated_and_singleton() {
        let x = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![0.99, 0.1], vec![-1.0, 0.0], vec![-0.99, 0.1], vec![0.0, 1.0]]).unwrap();
        let igp = in_group_proportion(&x, &[0, 0, 1, 1, 2]).unwrap();
        assert_eq!(igp, vec![Some(1.0), Some(1.0), None]);
    }
}
