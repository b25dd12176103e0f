//! RoarGraph: a proximity graph index for approximate nearest neighbor
//! search that is shaped by a sample of the queries it will serve.
//!
//! Construction runs in three steps. Each construction query is linked to
//! its nearest base vectors in a query-base bipartite graph; the bipartite
//! graph is projected onto the base vectors with a diversity-preserving
//! pruning rule; finally every base vector searches the projected graph to
//! add supplementary edges that restore reachability.
//!
//! ```
//! use roargraph::{build_roargraph, beam_search, BuildParams, Metric, SearchMode, VectorSet};
//!
//! let base = VectorSet::from_rows(2, Metric::L2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])?;
//! let queries = VectorSet::from_rows(2, Metric::L2, &[[0.9, 0.1], [0.1, 0.9]])?;
//! let params = BuildParams { nq: 3, max_degree: 4, search_l: 8 };
//! let (index, _bipartite) = build_roargraph(&base, &queries, params, 1)?;
//!
//! let report = beam_search(&index, &base, &[0.95, 0.95], 4, 1, SearchMode::Online)?;
//! assert_eq!(report.ids, vec![3]);
//! # Ok::<(), roargraph::Error>(())
//! ```

mod error;
mod metric;
mod neighbor;
mod parallel;
mod truth;
mod vectors;

pub mod graph;
pub mod io;
pub mod oracle;
pub mod analysis;
pub mod bench;
pub mod search;
pub mod update;

pub use error::{Error, Result};
pub use graph::{
    acquire_neighbors, build_baseline_graph, build_roargraph, build_stage, BipartiteGraph,
    BuildParams, RoarIndex, Stage,
};
pub use metric::Metric;
pub use neighbor::Neighbor;
pub use oracle::{exact_knn, mean_recall, recall_at_k};
pub use search::{batch_search, beam_search, SearchMode, SearchReport, Searcher};
pub use truth::GroundTruth;
pub use update::{delete, insert, DeleteStatus, InsertReport, Inserter};
pub use vectors::{centroid, medoid, VectorSet};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ood-queries.md")]
    mod ood_queries {}
    #[doc = include_str!("../../../book/src/bipartite.md")]
    mod bipartite {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/enhancement.md")]
    mod enhancement {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/updates.md")]
    mod updates {}
    #[doc = include_str!("../../../book/src/benchmarking.md")]
    mod benchmarking {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
