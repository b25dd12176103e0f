use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::metric::Metric;
use crate::vectors::VectorSet;

/// Parameters of the synthetic shell workload.
///
/// Directions are drawn around a random axis: the axis plus a Gaussian
/// offset of scale `cone_spread` inside a random `intrinsic_dim`-dimensional
/// subspace plus isotropic noise of scale `ambient_noise`, normalised to unit
/// length. Base vectors and in-distribution queries sit on the unit shell
/// with radial noise `shell_noise`; out-of-distribution queries use the same
/// law scaled by `1 - ood_depth`, which sinks them inside the shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams {
    pub n_base: usize,
    pub n_query_ood: usize,
    pub n_query_id: usize,
    /// Out-of-distribution queries drawn for index construction, disjoint
    /// from the evaluation queries.
    pub n_train_ood: usize,
    pub dim: usize,
    pub seed: u64,
    pub shell_noise: f32,
    pub ood_depth: f32,
    pub cone_spread: f32,
    pub intrinsic_dim: usize,
    pub ambient_noise: f32,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            n_base: 100_000,
            n_query_ood: 1_000,
            n_query_id: 1_000,
            n_train_ood: 100_000,
            dim: 32,
            seed: 42,
            shell_noise: 0.01,
            ood_depth: 0.3,
            cone_spread: 0.08,
            intrinsic_dim: 6,
            ambient_noise: 0.005,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(invalid("synthetic data needs dim >= 3"));
        }
        if self.intrinsic_dim == 0 || self.intrinsic_dim >= self.dim {
            return Err(invalid("intrinsic_dim must be in 1..dim"));
        }
        if !(0.0..1.0).contains(&self.ood_depth) {
            return Err(invalid("ood_depth must be in [0, 1)"));
        }
        for (name, v) in [
            ("shell_noise", self.shell_noise),
            ("cone_spread", self.cone_spread),
            ("ambient_noise", self.ambient_noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be a finite non-negative number")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticWorkload {
    pub base: VectorSet,
    pub ood_queries: VectorSet,
    pub id_queries: VectorSet,
    pub train_queries: VectorSet,
}

/// Generates base vectors, out-of-distribution and in-distribution
/// evaluation queries, and out-of-distribution construction queries. Each
/// set uses its own random stream, so changing one size leaves the other
/// sets unchanged.
pub fn gen_synthetic(p: &SyntheticParams) -> Result<SyntheticWorkload> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let basis = orthonormal(&mut rng, p.dim, p.intrinsic_dim + 1);
    let draw = |stream: u64, n: usize, scale: f32| -> Result<VectorSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        rng.set_stream(stream);
        let mut data = Vec::with_capacity(n * p.dim);
        let mut v = vec![0.0f64; p.dim];
        for _ in 0..n {
            v.copy_from_slice(&basis[0]);
            for b in &basis[1..] {
                let z: f64 = rng.sample(StandardNormal);
                for (x, e) in v.iter_mut().zip(b) {
                    *x += f64::from(p.cone_spread) * z * e;
                }
            }
            for x in v.iter_mut() {
                *x += f64::from(p.ambient_noise) * rng.sample::<f64, _>(StandardNormal);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let eps: f64 = rng.sample(StandardNormal);
            let r = f64::from(scale) * (1.0 + f64::from(p.shell_noise) * eps) / norm;
            data.extend(v.iter().map(|x| (x * r) as f32));
        }
        VectorSet::new(p.dim, Metric::L2, data)
    };
    Ok(SyntheticWorkload {
        base: draw(1, p.n_base, 1.0)?,
        ood_queries: draw(2, p.n_query_ood, 1.0 - p.ood_depth)?,
        id_queries: draw(3, p.n_query_id, 1.0)?,
        train_queries: draw(4, p.n_train_ood, 1.0 - p.ood_depth)?,
    })
}

/// `k` orthonormal vectors in `dim` dimensions via Gram-Schmidt on Gaussian
/// draws.
pub(crate) fn orthonormal(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for b in &out {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push(v);
        }
    }
    out
}
