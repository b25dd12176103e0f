use log::warn;
use serde::Serialize;

use crate::analysis::profile::median;
use crate::error::{Error, Result};
use crate::parallel;
use crate::vectors::VectorSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornParams {
    /// Entropic regularisation. `None` uses a tenth of the median cost.
    pub epsilon: Option<f64>,
    pub max_iters: usize,
    /// Convergence threshold on the L1 violation of the row marginals.
    pub tol: f64,
}

impl Default for SinkhornParams {
    fn default() -> Self {
        Self {
            epsilon: None,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinkhornResult {
    /// Square root of the transport cost of the regularised plan.
    pub distance: f64,
    pub epsilon: f64,
    pub iterations: usize,
    /// Final L1 marginal violation.
    pub marginal_error: f64,
    pub converged: bool,
}

const CHECK_EVERY: usize = 10;

/// Entropy-regularised 2-Wasserstein estimate between two uniformly
/// weighted samples, using squared Euclidean cost and log-domain Sinkhorn
/// iterations. Non-convergence is reported in the result, not as an error.
pub fn wasserstein2_sinkhorn(a: &VectorSet, b: &VectorSet, params: SinkhornParams) -> Result<SinkhornResult> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let (n, m) = (a.len(), b.len());
    let cost: Vec<f64> = (0..n)
        .flat_map(|i| (0..m).map(move |j| sq_dist(a.row(i), b.row(j))))
        .collect();
    let cost_t: Vec<f64> = (0..m).flat_map(|j| (0..n).map(|i| cost[i * m + j]).collect::<Vec<_>>()).collect();
    let eps = match params.epsilon {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => return Err(crate::error::invalid(format!("epsilon must be positive, got {e}"))),
        None => {
            let med = median(&cost);
            if med > 0.0 { 0.1 * med } else { 1e-3 }
        }
    };
    let log_a = -(n as f64).ln();
    let log_b = -(m as f64).ln();
    let mut f = vec![0.0f64; n];
    let mut g = vec![0.0f64; m];
    let mut iterations = 0;
    let mut err = f64::INFINITY;
    while iterations < params.max_iters {
        f = parallel::map_indexed(0, n, || (), |_, i| -eps * lse(&cost[i * m..(i + 1) * m], &g, eps, log_b));
        g = parallel::map_indexed(0, m, || (), |_, j| -eps * lse(&cost_t[j * n..(j + 1) * n], &f, eps, log_a));
        iterations += 1;
        if iterations % CHECK_EVERY == 0 || iterations == params.max_iters {
            err = row_violation(&cost, &f, &g, eps, log_a, log_b, m);
            if err < params.tol {
                break;
            }
        }
    }
    let converged = err < params.tol;
    if !converged {
        warn!("sinkhorn stopped after {iterations} iterations with marginal error {err:.3e}");
    }
    let total: f64 = (0..n)
        .map(|i| {
            let row = &cost[i * m..(i + 1) * m];
            row.iter()
                .zip(&g)
                .map(|(&c, &gj)| ((f[i] + gj - c) / eps + log_a + log_b).exp() * c)
                .sum::<f64>()
        })
        .sum();
    Ok(SinkhornResult {
        distance: total.max(0.0).sqrt(),
        epsilon: eps,
        iterations,
        marginal_error: err,
        converged,
    })
}

fn sq_dist(x: &[f32], y: &[f32]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&p, &q)| {
            let d = f64::from(p) - f64::from(q);
            d * d
        })
        .sum()
}

/// `log sum_j exp((pot_j - c_j) / eps + log_w)`, stabilised by the maximum.
fn lse(costs: &[f64], pot: &[f64], eps: f64, log_w: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (&c, &p) in costs.iter().zip(pot) {
        max = max.max((p - c) / eps);
    }
    let s: f64 = costs.iter().zip(pot).map(|(&c, &p)| ((p - c) / eps - max).exp()).sum();
    max + s.ln() + log_w
}

fn row_violation(cost: &[f64], f: &[f64], g: &[f64], eps: f64, log_a: f64, log_b: f64, m: usize) -> f64 {
    let a = log_a.exp();
    (0..f.len())
        .map(|i| {
            let row: f64 = cost[i * m..(i + 1) * m]
                .iter()
                .zip(g)
                .map(|(&c, &gj)| ((f[i] + gj - c) / eps + log_a + log_b).exp())
                .sum();
            (row - a).abs()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Metric;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(n: usize, dim: usize, seed: u64) -> VectorSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * dim).map(|_| rng.sample::<f32, _>(StandardNormal)).collect();
        VectorSet::new(dim, Metric::L2, data).unwrap()
    }

    fn shifted(set: &VectorSet, c: f32) -> VectorSet {
        let mut data = set.as_slice().to_vec();
        for row in data.chunks_exact_mut(set.dim()) {
            row[0] += c;
        }
        VectorSet::new(set.dim(), Metric::L2, data).unwrap()
    }

    #[test]
    fn single_points() {
        let a = VectorSet::from_rows(2, Metric::L2, &[[0.0, 0.0]]).unwrap();
        let b = VectorSet::from_rows(2, Metric::L2, &[[3.0, 4.0]]).unwrap();
        let r = wasserstein2_sinkhorn(&a, &b, SinkhornParams::default()).unwrap();
        assert!((r.distance - 5.0).abs() < 1e-9);
        assert!(r.converged);
    }

    #[test]
    fn self_transport_is_small() {
        let a = gaussian(200, 4, 1);
        let params = SinkhornParams {
            epsilon: Some(0.01),
            ..Default::default()
        };
        let r = wasserstein2_sinkhorn(&a, &a, params).unwrap();
        let mut pair = 0.0;
        for i in 0..200 {
            for j in 0..200 {
                pair += sq_dist(a.row(i), a.row(j)).sqrt();
            }
        }
        pair /= 200.0 * 200.0;
        assert!(r.distance <= 0.05 * pair, "{} vs {}", r.distance, pair);
    }

    #[test]
    fn shift_is_recovered() {
        let a = gaussian(300, 8, 2);
        let b = shifted(&a, 1.5);
        let params = SinkhornParams {
            epsilon: Some(0.05),
            ..Default::default()
        };
        let r = wasserstein2_sinkhorn(&a, &b, params).unwrap();
        assert!((r.distance - 1.5).abs() < 0.15, "{r:?}");
    }

    #[test]
    fn symmetric_and_non_negative() {
        let a = gaussian(80, 3, 3);
        let b = shifted(&gaussian(60, 3, 4), 0.7);
        let p = SinkhornParams::default();
        let ab = wasserstein2_sinkhorn(&a, &b, p).unwrap();
        let ba = wasserstein2_sinkhorn(&b, &a, p).unwrap();
        assert!(ab.distance >= 0.0);
        assert!((ab.distance - ba.distance).abs() < 1e-4, "{ab:?} {ba:?}");
    }

    #[test]
    fn reports_non_convergence() {
        let a = gaussian(50, 3, 5);
        let b = shifted(&a, 2.0);
        let p = SinkhornParams {
            epsilon: Some(1e-3),
            max_iters: 1,
            tol: 1e-12,
        };
        let r = wasserstein2_sinkhorn(&a, &b, p).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }
}
