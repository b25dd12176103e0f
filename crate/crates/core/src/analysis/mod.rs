//! Workload diagnostics: how far a query set sits from the base data, and a
//! generator for synthetic out-of-distribution workloads.

mod histogram;
mod mahalanobis;
mod profile;
mod sinkhorn;
mod synthetic;

pub use histogram::Histogram;
pub use mahalanobis::{mahalanobis_profile, MahalanobisProfile, MahalanobisModel};
pub use profile::{nn_dispersion_profile, nn_distance_profile, median, NnDistanceProfile};
pub use sinkhorn::{wasserstein2_sinkhorn, SinkhornParams, SinkhornResult};
pub use synthetic::{gen_synthetic, SyntheticParams, SyntheticWorkload};
