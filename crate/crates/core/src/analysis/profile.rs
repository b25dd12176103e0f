use serde::Serialize;

use crate::analysis::histogram::Histogram;
use crate::error::{invalid, Result};
use crate::parallel;
use crate::truth::GroundTruth;
use crate::vectors::VectorSet;

/// Median of `values`; the mean of the two middle values for even lengths,
/// zero when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NnDistanceProfile {
    pub distances: Vec<f64>,
    pub median: f64,
    pub mean: f64,
    pub histogram: Histogram,
}

/// Distance from each query to its nearest base vector, in reported units
/// (Euclidean rather than squared for L2).
pub fn nn_distance_profile(truth: &GroundTruth, metric: crate::Metric) -> NnDistanceProfile {
    let distances: Vec<f64> = (0..truth.len())
        .map(|q| metric.to_reported(truth.dists(q)[0]))
        .collect();
    let mean = if distances.is_empty() {
        0.0
    } else {
        distances.iter().sum::<f64>() / distances.len() as f64
    };
    NnDistanceProfile {
        median: median(&distances),
        mean,
        histogram: Histogram::new(&distances, Histogram::DEFAULT_BINS),
        distances,
    }
}

/// For every rank `i < k`: the mean, over queries, of the average reported
/// distance between a query's `i`-th nearest neighbor and its other `k - 1`
/// nearest neighbors.
pub fn nn_dispersion_profile(base: &VectorSet, truth: &GroundTruth) -> Result<Vec<f64>> {
    let k = truth.k();
    if k < 2 {
        return Err(invalid("dispersion needs k >= 2"));
    }
    if let Some(max) = truth.max_id() {
        if max as usize >= base.len() {
            return Err(crate::Error::IdOutOfRange {
                id: u64::from(max),
                bound: base.len() as u64,
            });
        }
    }
    let metric = base.metric();
    let per_query = parallel::map_indexed(0, truth.len(), || (), |_, q| {
        let ids = truth.ids(q);
        let mut sums = vec![0.0f64; k];
        for i in 0..k {
            for j in i + 1..k {
                let d = metric.to_reported(base.distance_between(ids[i], ids[j]));
                sums[i] += d;
                sums[j] += d;
            }
        }
        sums
    });
    let mut out = vec![0.0f64; k];
    for sums in &per_query {
        for (o, s) in out.iter_mut().zip(sums) {
            *o += s / (k - 1) as f64;
        }
    }
    if !per_query.is_empty() {
        for o in &mut out {
            *o /= per_query.len() as f64;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use crate::oracle::exact_knn;

    #[test]
    fn median_cases() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    #[test]
    fn dispersion_hand_example() {
        let base = VectorSet::from_rows(1, Metric::L2, &[[0.0], [1.0], [2.0]]).unwrap();
        let q = VectorSet::from_rows(1, Metric::L2, &[[0.0]]).unwrap();
        let gt = exact_knn(&base, &q, 3).unwrap();
        assert_eq!(nn_dispersion_profile(&base, &gt).unwrap(), vec![1.5, 1.0, 1.5]);
    }

    #[test]
    fn dispersion_of_identical_points_is_zero() {
        let base = VectorSet::from_rows(2, Metric::L2, &[[1.0, 2.0]; 5]).unwrap();
        let gt = exact_knn(&base, &base.slice(0..2), 5).unwrap();
        assert!(nn_dispersion_profile(&base, &gt).unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn dispersion_needs_two_neighbors() {
        let base = VectorSet::from_rows(1, Metric::L2, &[[0.0], [1.0]]).unwrap();
        let gt = exact_knn(&base, &base, 1).unwrap();
        assert!(nn_dispersion_profile(&base, &gt).is_err());
    }

    #[test]
    fn dispersion_ignores_query_order() {
        let rows: Vec<[f32; 2]> = (0..30).map(|i| [(i as f32 * 0.37).sin(), (i as f32 * 1.3).cos()]).collect();
        let base = VectorSet::from_rows(2, Metric::L2, &rows).unwrap();
        let q1 = base.select(&[3, 7, 11, 20]);
        let q2 = base.select(&[20, 11, 3, 7]);
        let a = nn_dispersion_profile(&base, &exact_knn(&base, &q1, 5).unwrap()).unwrap();
        let b = nn_dispersion_profile(&base, &exact_knn(&base, &q2, 5).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn nn_distance_is_unsquared() {
        let base = VectorSet::from_rows(2, Metric::L2, &[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let q = VectorSet::from_rows(2, Metric::L2, &[[0.0, 0.0], [6.0, 8.0]]).unwrap();
        let p = nn_distance_profile(&exact_knn(&base, &q, 1).unwrap(), Metric::L2);
        assert_eq!(p.distances, vec![0.0, 5.0]);
        assert_eq!(p.median, 2.5);
    }
}
