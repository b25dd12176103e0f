//! Index construction: the query-base bipartite graph, neighborhood-aware
//! projection, connectivity enhancement, and the query-agnostic baseline.

mod bipartite;
mod build;
mod enhance;
mod index;
mod projection;
mod prune;
mod stage;

pub use bipartite::BipartiteGraph;
pub use build::{build_baseline_graph, build_from_truth, build_roargraph, build_stage, Stage};
pub use enhance::{enhance_connectivity, repair_reachability};
pub use index::{hop_distances, isolated_count, reachable_count, BuildParams, RoarIndex};
pub use projection::project;
pub use prune::acquire_neighbors;
pub use stage::BipartiteSearchGraph;

pub(crate) use prune::{select, sorted_candidates};
