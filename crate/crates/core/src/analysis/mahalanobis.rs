use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use crate::analysis::histogram::Histogram;
use crate::analysis::profile::median;
use crate::error::{invalid, Error, Result};
use crate::parallel;
use crate::vectors::VectorSet;

/// Mean and regularised covariance of a sample, ready for distance queries.
pub struct MahalanobisModel {
    mean: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl MahalanobisModel {
    /// Fits the model on `rows` (at least `dim + 1` of them). The covariance
    /// is the unbiased sample covariance plus `1e-6 * trace / dim` on the
    /// diagonal.
    pub fn fit<'a>(dim: usize, rows: impl Iterator<Item = &'a [f32]> + Clone) -> Result<Self> {
        let n = rows.clone().count();
        if n < dim + 1 {
            return Err(invalid(format!(
                "covariance needs at least {} sample rows, got {n}",
                dim + 1
            )));
        }
        let mut mean = DVector::<f64>::zeros(dim);
        for r in rows.clone() {
            for (m, &x) in mean.iter_mut().zip(r) {
                *m += f64::from(x);
            }
        }
        mean /= n as f64;
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        let mut centered = DVector::<f64>::zeros(dim);
        for r in rows {
            for ((c, &x), m) in centered.iter_mut().zip(r).zip(mean.iter()) {
                *c = f64::from(x) - m;
            }
            cov.syger(1.0, &centered, &centered, 1.0);
        }
        cov.fill_upper_triangle_with_lower_triangle();
        cov /= (n - 1) as f64;
        let lambda = 1e-6 * cov.trace() / dim as f64;
        for i in 0..dim {
            cov[(i, i)] += lambda;
        }
        let chol = Cholesky::new(cov).ok_or(Error::SingularCovariance)?;
        Ok(Self { mean, chol })
    }

    pub fn distance(&self, q: &[f32]) -> f64 {
        let d = DVector::from_iterator(
            self.mean.len(),
            q.iter().zip(self.mean.iter()).map(|(&x, m)| f64::from(x) - m),
        );
        let y = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&d)
            .expect("cholesky factor has a positive diagonal");
        y.norm()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MahalanobisProfile {
    pub distances: Vec<f64>,
    pub median: f64,
    pub mean: f64,
    pub histogram: Histogram,
}

/// Mahalanobis distance of every query to a strided sample of at most
/// `sample_size` base rows.
pub fn mahalanobis_profile(
    base: &VectorSet,
    queries: &VectorSet,
    sample_size: usize,
) -> Result<MahalanobisProfile> {
    if base.dim() != queries.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: queries.dim(),
        });
    }
    let take = sample_size.min(base.len());
    if take == 0 {
        return Err(Error::EmptySet);
    }
    let stride = base.len() / take;
    let sample = (0..take).map(|i| base.row(i * stride));
    let model = MahalanobisModel::fit(base.dim(), sample)?;
    let distances = parallel::map_indexed(0, queries.len(), || (), |_, i| model.distance(queries.row(i)));
    let mean = if distances.is_empty() {
        0.0
    } else {
        distances.iter().sum::<f64>() / distances.len() as f64
    };
    Ok(MahalanobisProfile {
        median: median(&distances),
        mean,
        histogram: Histogram::new(&distances, Histogram::DEFAULT_BINS),
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, dim: usize, seed: u64) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n * dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()
    }

    /// Rows whose sample mean is exactly zero and sample covariance exactly
    /// `diag(scale^2)` (unbiased): the 2^d sign patterns scaled so that
    /// `sum x_i^2 / (n - 1) = scale^2`.
    fn exact_diag(scales: &[f32]) -> VectorSet {
        let d = scales.len();
        let n = 1usize << d;
        let c = ((n - 1) as f32 / n as f32).sqrt();
        let mut data = Vec::new();
        for mask in 0..n {
            for (j, s) in scales.iter().enumerate() {
                let sign = if mask >> j & 1 == 1 { 1.0 } else { -1.0 };
                data.push(sign * s * c);
            }
        }
        VectorSet::new(d, Metric::L2, data).unwrap()
    }

    #[test]
    fn closed_form_cases() {
        let base = exact_diag(&[2.0, 1.0]);
        let model = MahalanobisModel::fit(2, base.rows()).unwrap();
        assert!(model.distance(&[0.0, 0.0]).abs() < 1e-9);
        assert!((model.distance(&[2.0, 0.0]) - 1.0).abs() < 1e-5);
        assert!((model.distance(&[0.0, 1.0]) - 1.0).abs() < 1e-5);

        let base = exact_diag(&[1.0, 1.0, 1.0]);
        let model = MahalanobisModel::fit(3, base.rows()).unwrap();
        assert!((model.distance(&[1.0, 0.0, 0.0]) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let base = VectorSet::from_rows(2, Metric::L2, &[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(MahalanobisModel::fit(2, base.rows()).is_err());
    }

    #[test]
    fn affine_invariance() {
        let dim = 6;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..5 {
            let base = VectorSet::new(dim, Metric::L2, gaussian(400, dim, trial)).unwrap();
            let queries = VectorSet::new(dim, Metric::L2, gaussian(20, dim, 100 + trial)).unwrap();
            // rotation times a diagonal scaling in [0.5, 2]: condition number <= 4
            let q = crate::analysis::synthetic::orthonormal(&mut rng, dim, dim);
            let s: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
            let a: Vec<f32> = (0..dim * dim).map(|i| (q[i / dim][i % dim] * s[i % dim]) as f32).collect();
            let b: Vec<f32> = (0..dim).map(|_| 5.0 * rng.sample::<f32, _>(StandardNormal)).collect();
            let map = |set: &VectorSet| {
                let mut out = Vec::new();
                for r in set.rows() {
                    for i in 0..dim {
                        let mut s = f64::from(b[i]);
                        for j in 0..dim {
                            s += f64::from(a[i * dim + j]) * f64::from(r[j]);
                        }
                        out.push(s as f32);
                    }
                }
                VectorSet::new(dim, Metric::L2, out).unwrap()
            };
            let p1 = mahalanobis_profile(&base, &queries, 400).unwrap();
            let p2 = mahalanobis_profile(&map(&base), &map(&queries), 400).unwrap();
            for (x, y) in p1.distances.iter().zip(&p2.distances) {
                assert!((x - y).abs() <= 1e-4 * x.max(1.0), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn profile_summary() {
        let base = VectorSet::new(3, Metric::L2, gaussian(500, 3, 1)).unwrap();
        let p = mahalanobis_profile(&base, &base, 500).unwrap();
        assert_eq!(p.distances.len(), 500);
        assert_eq!(p.histogram.total(), 500);
        // average squared distance of the fitting sample itself is (n-1)/n * d
        let ms: f64 = p.distances.iter().map(|d| d * d).sum::<f64>() / 500.0;
        assert!((ms - 3.0 * 499.0 / 500.0).abs() < 1e-3, "{ms}");
    }
}
