//! Exhaustive k-nearest-neighbor search and recall.

use std::collections::BinaryHeap;

use crate::error::{invalid, Result};
use crate::neighbor::Neighbor;
use crate::parallel;
use crate::truth::GroundTruth;
use crate::vectors::VectorSet;

/// Exact `k` nearest base vectors of every query, sorted by distance with
/// ties broken toward the smaller id. Parallel over queries on the global
/// rayon pool.
pub fn exact_knn(base: &VectorSet, queries: &VectorSet, k: usize) -> Result<GroundTruth> {
    exact_knn_with_threads(base, queries, k, 0)
}

pub fn exact_knn_with_threads(
    base: &VectorSet,
    queries: &VectorSet,
    k: usize,
    threads: usize,
) -> Result<GroundTruth> {
    base.check_compatible(queries)?;
    if k == 0 || k > base.len() {
        return Err(invalid(format!(
            "k={k} must lie in 1..={} (base size)",
            base.len()
        )));
    }
    let rows = parallel::map_indexed(
        threads,
        queries.len(),
        || BinaryHeap::with_capacity(k + 1),
        |scratch, q| nearest(base, queries.row(q), k, None, scratch),
    );
    let mut ids = Vec::with_capacity(queries.len() * k);
    let mut dists = Vec::with_capacity(queries.len() * k);
    for row in rows {
        for n in row {
            ids.push(n.id);
            dists.push(n.distance);
        }
    }
    GroundTruth::new(k, ids, dists)
}

/// The `k` nearest rows of `base` to `query`, optionally skipping one id.
/// `scratch` is a reusable bounded max-heap.
pub(crate) fn nearest(
    base: &VectorSet,
    query: &[f32],
    k: usize,
    exclude: Option<u32>,
    scratch: &mut BinaryHeap<Neighbor>,
) -> Vec<Neighbor> {
    scratch.clear();
    if k == 0 {
        return Vec::new();
    }
    for i in 0..base.len() as u32 {
        if Some(i) == exclude {
            continue;
        }
        let n = Neighbor::new(i, base.distance_to(i, query));
        if scratch.len() < k {
            scratch.push(n);
        } else if n < *scratch.peek().unwrap() {
            *scratch.peek_mut().unwrap() = n;
        }
    }
    let mut top: Vec<Neighbor> = scratch.drain().collect();
    top.sort_unstable();
    top
}

/// `|first k of result ∩ first k of truth| / k`.
pub fn recall_at_k(result: &[u32], truth: &[u32], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(invalid("recall requires k >= 1"));
    }
    if truth.len() < k {
        return Err(invalid(format!(
            "truth has {} ids, fewer than k={k}",
            truth.len()
        )));
    }
    let truth = &truth[..k];
    let hits = result
        .iter()
        .take(k)
        .filter(|id| truth.contains(id))
        .count();
    Ok(hits as f64 / k as f64)
}

/// Mean recall@k over all rows of `truth`.
pub fn mean_recall(results: &[Vec<u32>], truth: &GroundTruth, k: usize) -> Result<f64> {
    if results.len() != truth.len() {
        return Err(invalid("result and truth row counts differ"));
    }
    if results.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for (q, r) in results.iter().enumerate() {
        sum += recall_at_k(r, truth.ids(q), k)?;
    }
    Ok(sum / results.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(n: usize, dim: usize, seed: u64) -> VectorSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        VectorSet::new(dim, Metric::L2, data).unwrap()
    }

    /// Double loop with insertion into a sorted list; shares nothing with
    /// the selection-based implementation.
    fn naive_knn(base: &VectorSet, queries: &VectorSet, k: usize) -> Vec<Vec<u32>> {
        queries
            .rows()
            .map(|q| {
                let mut best: Vec<(f32, u32)> = Vec::new();
                for i in 0..base.len() {
                    let d = base.metric().distance(base.row(i), q);
                    let pos = best
                        .iter()
                        .position(|&(bd, bi)| d < bd || (d == bd && (i as u32) < bi))
                        .unwrap_or(best.len());
                    best.insert(pos, (d, i as u32));
                    best.truncate(k);
                }
                best.into_iter().map(|(_, i)| i).collect()
            })
            .collect()
    }

    #[test]
    fn hand_computed_example() {
        let base = VectorSet::from_rows(2, Metric::L2, &[[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]]).unwrap();
        let q = VectorSet::from_rows(2, Metric::L2, &[[0.9, 0.0]]).unwrap();
        let gt = exact_knn(&base, &q, 2).unwrap();
        assert_eq!(gt.ids(0), &[1, 0]);
        assert!((gt.dists(0)[0] - 0.01).abs() < 1e-6);
        assert!((gt.dists(0)[1] - 0.81).abs() < 1e-6);
    }

    #[test]
    fn k_equal_to_base_size_sorts_everything() {
        let base = random_set(30, 4, 1);
        let q = random_set(3, 4, 2);
        let gt = exact_knn(&base, &q, 30).unwrap();
        for r in 0..3 {
            let mut ids = gt.ids(r).to_vec();
            ids.sort_unstable();
            assert_eq!(ids, (0..30).collect::<Vec<_>>());
        }
    }

    #[test]
    fn query_equal_to_base_row_ranks_it_first() {
        let base = random_set(50, 6, 3);
        let q = base.select(&[17]);
        let gt = exact_knn(&base, &q, 5).unwrap();
        assert_eq!(gt.ids(0)[0], 17);
        assert_eq!(gt.dists(0)[0], 0.0);
    }

    #[test]
    fn ties_break_by_id() {
        let base = VectorSet::from_rows(1, Metric::L2, &[[2.0], [0.0], [2.0], [-2.0]]).unwrap();
        let q = VectorSet::from_rows(1, Metric::L2, &[[0.0]]).unwrap();
        let gt = exact_knn(&base, &q, 4).unwrap();
        assert_eq!(gt.ids(0), &[1, 0, 2, 3]);
    }

    #[test]
    fn rejects_bad_k_and_mismatched_sets() {
        let base = random_set(5, 2, 4);
        let q = random_set(1, 2, 5);
        assert!(exact_knn(&base, &q, 0).is_err());
        assert!(exact_knn(&base, &q, 6).is_err());
        let q3 = random_set(1, 3, 5);
        assert!(exact_knn(&base, &q3, 1).is_err());
        let qip = q.clone().with_metric(Metric::InnerProduct).unwrap();
        assert!(exact_knn(&base, &qip, 1).is_err());
    }

    #[test]
    fn agrees_with_naive_double_loop() {
        for seed in 0..3 {
            let base = random_set(200, 16, 10 + seed);
            let q = random_set(20, 16, 20 + seed);
            let gt = exact_knn_with_threads(&base, &q, 10, 1).unwrap();
            let naive = naive_knn(&base, &q, 10);
            for (r, expect) in naive.iter().enumerate() {
                assert_eq!(gt.ids(r), expect.as_slice());
            }
        }
    }

    #[test]
    fn chunking_does_not_change_results() {
        let base = random_set(300, 8, 30);
        let q = random_set(50, 8, 31);
        let a = exact_knn_with_threads(&base, &q, 7, 1).unwrap();
        let b = exact_knn_with_threads(&base, &q, 7, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn recall_cases() {
        let truth: Vec<u32> = (0..10).collect();
        assert_eq!(recall_at_k(&truth, &truth, 10).unwrap(), 1.0);
        let disjoint: Vec<u32> = (10..20).collect();
        assert_eq!(recall_at_k(&disjoint, &truth, 10).unwrap(), 0.0);
        let half: Vec<u32> = (5..15).collect();
        assert_eq!(recall_at_k(&half, &truth, 10).unwrap(), 0.5);
        assert!(recall_at_k(&truth, &truth, 0).is_err());
        assert!(recall_at_k(&truth, &truth[..3], 4).is_err());
    }

    #[test]
    fn mean_recall_ignores_query_order() {
        let base = random_set(100, 4, 40);
        let q = random_set(12, 4, 41);
        let gt = exact_knn(&base, &q, 5).unwrap();
        let results: Vec<Vec<u32>> = (0..12).map(|r| gt.ids(r).iter().map(|i| i ^ (r as u32 % 3)).collect()).collect();
        let forward = mean_recall(&results, &gt, 5).unwrap();
        let order: Vec<u32> = (0..12).rev().collect();
        let qr = q.select(&order);
        let gtr = exact_knn(&base, &qr, 5).unwrap();
        let rev: Vec<Vec<u32>> = order.iter().map(|&i| results[i as usize].clone()).collect();
        assert!((mean_recall(&rev, &gtr, 5).unwrap() - forward).abs() < 1e-12);
    }
}
