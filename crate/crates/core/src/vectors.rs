use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::metric::{dot, Metric};
use crate::neighbor::Neighbor;

/// A dense, row-major collection of `count` vectors of dimension `dim`.
///
/// Used for both the indexed base data and query sets. All values are
/// finite; sets with the [`Metric::Cosine`] metric hold unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    dim: usize,
    metric: Metric,
    data: Vec<f32>,
}

impl VectorSet {
    /// Wraps row-major `data`. Rejects non-finite values and, for cosine
    /// sets, normalises every row (zero rows are rejected).
    pub fn new(dim: usize, metric: Metric, mut data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "data length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: pos / dim });
        }
        if metric == Metric::Cosine {
            for (row, v) in data.chunks_exact_mut(dim).enumerate() {
                normalize(v).ok_or(Error::ZeroNorm { row })?;
            }
        }
        Ok(Self { dim, metric, data })
    }

    pub fn from_rows<R: AsRef<[f32]>>(dim: usize, metric: Metric, rows: &[R]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, metric, data)
    }

    pub fn empty(dim: usize, metric: Metric) -> Result<Self> {
        Self::new(dim, metric, Vec::new())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn metric(&self) -> Metric {
        self.metric
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + Clone + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Distance from `query` to row `i` under this set's metric.
    #[inline]
    pub fn distance_to(&self, i: u32, query: &[f32]) -> f32 {
        self.metric.distance(self.row(i as usize), query)
    }

    #[inline]
    pub fn distance_between(&self, i: u32, j: u32) -> f32 {
        self.metric
            .distance(self.row(i as usize), self.row(j as usize))
    }

    /// Appends a vector and returns its row index. Cosine sets normalise it.
    pub fn push(&mut self, v: &[f32]) -> Result<u32> {
        self.check_query(v)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: self.len() });
        }
        let id = u32::try_from(self.len()).map_err(|_| invalid("vector set is full"))?;
        let start = self.data.len();
        self.data.extend_from_slice(v);
        if self.metric == Metric::Cosine && normalize(&mut self.data[start..]).is_none() {
            self.data.truncate(start);
            return Err(Error::ZeroNorm { row: id as usize });
        }
        Ok(id)
    }

    pub fn check_query(&self, v: &[f32]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &VectorSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.metric != other.metric {
            return Err(Error::MetricMismatch {
                left: self.metric,
                right: other.metric,
            });
        }
        Ok(())
    }

    /// Copies the rows in `range` into a new set.
    pub fn slice(&self, range: std::ops::Range<usize>) -> VectorSet {
        assert!(range.end <= self.len(), "slice out of bounds");
        VectorSet {
            dim: self.dim,
            metric: self.metric,
            data: self.data[range.start * self.dim..range.end * self.dim].to_vec(),
        }
    }

    /// Copies the rows listed in `ids` (in that order) into a new set.
    pub fn select(&self, ids: &[u32]) -> VectorSet {
        let mut data = Vec::with_capacity(ids.len() * self.dim);
        for &i in ids {
            data.extend_from_slice(self.row(i as usize));
        }
        VectorSet {
            dim: self.dim,
            metric: self.metric,
            data,
        }
    }

    /// A uniform random subset of `count` rows (all rows if `count` is at
    /// least the set size), kept in their original order.
    pub fn sample(&self, count: usize, seed: u64) -> VectorSet {
        if count >= self.len() {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ids: Vec<u32> = rand::seq::index::sample(&mut rng, self.len(), count)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        ids.sort_unstable();
        self.select(&ids)
    }

    /// Re-tags the set with another metric (normalising for cosine).
    pub fn with_metric(self, metric: Metric) -> Result<VectorSet> {
        VectorSet::new(self.dim, metric, self.data)
    }
}

fn normalize(v: &mut [f32]) -> Option<()> {
    let norm = dot(v, v).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(())
}

/// Arithmetic mean of all rows, accumulated in `f64`.
pub fn centroid(set: &VectorSet) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut sum = vec![0.0f64; set.dim()];
    for row in set.rows() {
        for (s, &x) in sum.iter_mut().zip(row) {
            *s += f64::from(x);
        }
    }
    let n = set.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(sum)
}

/// The search entry point: the base vector closest to the centroid under
/// the set's own metric. Ties resolve to the smaller id.
pub fn medoid(set: &VectorSet) -> Result<u32> {
    let center: Vec<f32> = centroid(set)?.into_iter().map(|x| x as f32).collect();
    let best = (0..set.len() as u32)
        .map(|i| Neighbor::new(i, set.distance_to(i, &center)))
        .min()
        .expect("non-empty");
    Ok(best.id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(n: usize, dim: usize, metric: Metric, seed: u64) -> VectorSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
        VectorSet::new(dim, metric, data).unwrap()
    }

    #[test]
    fn rejects_non_finite() {
        let err = VectorSet::new(2, Metric::L2, vec![0.0, 1.0, f32::NAN, 2.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1 }));
        assert!(VectorSet::new(1, Metric::L2, vec![f32::INFINITY]).is_err());
    }

    #[test]
    fn rejects_ragged_data() {
        assert!(VectorSet::new(3, Metric::L2, vec![0.0; 4]).is_err());
        assert!(VectorSet::new(0, Metric::L2, vec![]).is_err());
    }

    #[test]
    fn cosine_sets_are_normalized() {
        let s = VectorSet::new(2, Metric::Cosine, vec![3.0, 4.0]).unwrap();
        assert!((s.row(0)[0] - 0.6).abs() < 1e-7);
        assert!((s.row(0)[1] - 0.8).abs() < 1e-7);
        assert!(VectorSet::new(2, Metric::Cosine, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn medoid_of_collinear_points() {
        let s = VectorSet::new(1, Metric::L2, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(medoid(&s).unwrap(), 1);
    }

    #[test]
    fn medoid_of_single_point() {
        let s = VectorSet::new(3, Metric::L2, vec![5.0, 6.0, 7.0]).unwrap();
        assert_eq!(medoid(&s).unwrap(), 0);
    }

    #[test]
    fn medoid_of_empty_set_fails() {
        let s = VectorSet::empty(4, Metric::L2).unwrap();
        assert!(matches!(medoid(&s), Err(Error::EmptySet)));
    }

    #[test]
    fn medoid_matches_exhaustive_scan() {
        for metric in [Metric::L2, Metric::InnerProduct, Metric::Cosine] {
            let s = random_set(100, 8, metric, 11);
            let mut c = vec![0.0f64; 8];
            for i in 0..s.len() {
                for (j, x) in s.row(i).iter().enumerate() {
                    c[j] += f64::from(*x) / 100.0;
                }
            }
            let mut best = (f64::INFINITY, 0usize);
            for i in 0..s.len() {
                let d: f64 = match metric {
                    Metric::L2 => s.row(i).iter().zip(&c).map(|(x, y)| (f64::from(*x) - y).powi(2)).sum(),
                    _ => -s.row(i).iter().zip(&c).map(|(x, y)| f64::from(*x) * y).sum::<f64>(),
                };
                if d < best.0 {
                    best = (d, i);
                }
            }
            assert_eq!(medoid(&s).unwrap() as usize, best.1, "{metric:?}");
        }
    }

    #[test]
    fn inner_product_argmin_is_argmax_dot() {
        let s = random_set(200, 16, Metric::InnerProduct, 3);
        let q = random_set(20, 16, Metric::InnerProduct, 4);
        for qv in q.rows() {
            let by_dist = (0..200u32).map(|i| Neighbor::new(i, s.distance_to(i, qv))).min().unwrap().id;
            let by_dot = (0..200usize)
                .max_by(|&a, &b| {
                    let da: f64 = s.row(a).iter().zip(qv).map(|(x, y)| f64::from(x * y)).sum();
                    let db: f64 = s.row(b).iter().zip(qv).map(|(x, y)| f64::from(x * y)).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap() as u32;
            assert_eq!(by_dist, by_dot);
        }
    }

    #[test]
    fn sample_is_seeded_and_ordered() {
        let s = VectorSet::new(1, Metric::L2, (0..100).map(|x| x as f32).collect()).unwrap();
        let a = s.sample(10, 3);
        assert_eq!(a, s.sample(10, 3));
        assert_ne!(a, s.sample(10, 4));
        assert_eq!(a.len(), 10);
        assert!(a.as_slice().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s.sample(500, 1), s);
    }

    #[test]
    fn push_appends_and_validates() {
        let mut s = VectorSet::new(2, Metric::L2, vec![0.0, 0.0]).unwrap();
        assert_eq!(s.push(&[1.0, 2.0]).unwrap(), 1);
        assert_eq!(s.row(1), &[1.0, 2.0]);
        assert!(s.push(&[1.0]).is_err());
        assert!(s.push(&[f32::NAN, 0.0]).is_err());
        assert_eq!(s.len(), 2);
    }
}
