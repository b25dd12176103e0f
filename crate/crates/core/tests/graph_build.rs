use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use roargraph::graph::{
    enhance_connectivity, isolated_count, project, reachable_count, BipartiteGraph,
};
use roargraph::{
    batch_search, build_baseline_graph, build_roargraph, build_stage, exact_knn, medoid, BuildParams, Metric,
    Stage, VectorSet,
};

fn gaussian(n: usize, dim: usize, seed: u64) -> VectorSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorSet::new(dim, Metric::L2, (0..n * dim).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
}

fn uniform(n: usize, dim: usize, seed: u64) -> VectorSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorSet::new(dim, Metric::L2, (0..n * dim).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap()
}

/// Out-degree, id range, self-loop and duplicate checks done by hand.
fn check_lists(adj: &[Vec<u32>], cap: usize) {
    for (u, list) in adj.iter().enumerate() {
        assert!(list.len() <= cap, "node {u} has {} edges", list.len());
        let mut seen = std::collections::HashSet::new();
        for &v in list {
            assert!((v as usize) < adj.len());
            assert_ne!(v as usize, u);
            assert!(seen.insert(v), "duplicate edge {u}->{v}");
        }
    }
}

#[test]
fn default_parameters() {
    let p = BuildParams::default();
    assert_eq!((p.nq, p.max_degree, p.search_l), (100, 35, 500));
}

#[test]
fn single_base_vector() {
    let base = gaussian(1, 4, 1);
    let queries = gaussian(5, 4, 2);
    let (index, bip) = build_roargraph(&base, &queries, BuildParams::default(), 1).unwrap();
    assert_eq!(index.len(), 1);
    assert!(index.neighbors(0).is_empty());
    assert_eq!(index.medoid(), 0);
    assert_eq!(bip.base_neighbors(0).len(), 5);
}

#[test]
fn one_pivot_links_to_both_out_neighbors() {
    // the query sits by node 0; nodes 1 and 2 lie on opposite sides of it
    let base = VectorSet::from_rows(2, Metric::L2, &[[0.0f32, 0.0], [1.0, 0.0], [-1.0, 0.2]]).unwrap();
    let queries = VectorSet::from_rows(2, Metric::L2, &[[0.1f32, 0.0]]).unwrap();
    let truth = exact_knn(&base, &queries, 3).unwrap();
    let bip = BipartiteGraph::build(3, &truth).unwrap();
    assert_eq!(bip.base_neighbors(0), &[0]);
    assert_eq!(bip.query_neighbors(0), &[1, 2]);
    let adj = project(&bip, &base, &queries, 4, 10, 1).unwrap();
    assert_eq!(adj[0], vec![1, 2]);
    assert_eq!(adj[1], vec![0]);
    assert_eq!(adj[2], vec![0]);
}

#[test]
fn enhancement_of_a_complete_graph_adds_nothing() {
    let base = gaussian(8, 3, 3);
    let complete: Vec<Vec<u32>> = (0..8u32).map(|u| (0..8).filter(|&v| v != u).collect()).collect();
    let entry = medoid(&base).unwrap();
    let out = enhance_connectivity(&complete, &base, entry, 7, 8, 1).unwrap();
    check_lists(&out, 14);
    assert_eq!(out, complete);
}

#[test]
fn enhancement_removes_isolated_nodes_on_a_small_sample() {
    // text-like queries offset from image-like base clusters
    let base = gaussian(100, 8, 4);
    let mut queries = gaussian(100, 8, 5);
    let data: Vec<f32> = queries.as_slice().iter().enumerate().map(|(i, x)| if i % 8 == 0 { x + 3.0 } else { *x }).collect();
    queries = VectorSet::new(8, Metric::L2, data).unwrap();
    let params = BuildParams {
        nq: 10,
        max_degree: 6,
        search_l: 30,
    };
    let (projected, _) = build_stage(&base, &queries, params, 1, Stage::Projected).unwrap();
    let before = isolated_count(projected.adjacency());
    assert!(before > 0, "fixture should leave some node isolated");
    let (enhanced, _) = build_stage(&base, &queries, params, 1, Stage::Enhanced).unwrap();
    assert_eq!(enhanced.isolated_count(), 0);
    assert_eq!(reachable_count(enhanced.adjacency(), enhanced.medoid()), 100);
}

#[test]
fn ten_thousand_node_structure() {
    let base = gaussian(10_000, 16, 6);
    let queries = gaussian(10_000, 16, 7);
    let params = BuildParams {
        nq: 50,
        max_degree: 16,
        search_l: 100,
    };
    let (index, bip) = build_roargraph(&base, &queries, params, 0).unwrap();
    index.validate().unwrap();
    bip.validate().unwrap();
    check_lists(index.adjacency(), 32);
    let reach = reachable_count(index.adjacency(), index.medoid());
    assert!(reach as f64 >= 0.99 * 10_000.0, "reachable {reach}");
}

#[test]
fn baseline_and_roargraph_agree_on_in_distribution_queries() {
    let base = uniform(3000, 8, 8);
    let train = uniform(3000, 8, 9);
    let eval = uniform(200, 8, 10);
    let truth = exact_knn(&base, &eval, 10).unwrap();
    let params = BuildParams {
        nq: 30,
        max_degree: 12,
        search_l: 60,
    };
    let (roar, _) = build_roargraph(&base, &train, params, 0).unwrap();
    let baseline = build_baseline_graph(&base, 12, 60, 0).unwrap();
    check_lists(baseline.adjacency(), 24);
    let r1 = batch_search(&roar.graph(&base), &eval, 64, 10, 0, Some(&truth)).unwrap();
    let r2 = batch_search(&baseline.graph(&base), &eval, 64, 10, 0, Some(&truth)).unwrap();
    let (a, b) = (r1.mean_recall.unwrap(), r2.mean_recall.unwrap());
    assert!(a > 0.9 && b > 0.9, "{a} {b}");
    assert!((a - b).abs() < 0.05, "{a} {b}");
}

#[test]
fn single_threaded_builds_are_identical() {
    let base = gaussian(1500, 8, 11);
    let queries = gaussian(1500, 8, 12);
    let params = BuildParams {
        nq: 20,
        max_degree: 10,
        search_l: 40,
    };
    let (a, ba) = build_roargraph(&base, &queries, params, 1).unwrap();
    let (b, bb) = build_roargraph(&base, &queries, params, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(ba, bb);
    assert_eq!(build_baseline_graph(&base, 10, 40, 1).unwrap(), build_baseline_graph(&base, 10, 40, 1).unwrap());
}
