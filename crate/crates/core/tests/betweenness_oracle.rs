mod common;

use common::{close, LengthGraph};
use projgraph::centrality::{
    betweenness_decomposition_check, edge_betweenness, edge_decomposition_check,
    node_betweenness, EdgeDecomposition, NodeDecomposition,
};
use projgraph::{build_projection, synth, DistanceMode, EdgeKey, Execution, Mapping, SocialGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn small_graph(seed: u64) -> SocialGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=10);
    let p = rng.gen_range(0.1..0.6);
    synth::connected_gnp(n, p, seed)
}

fn small_mapping(n: usize, seed: u64) -> Mapping {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    let peers = rng.gen_range(1..=4);
    Mapping::from_labels(&synth::random_labels(n, peers, seed))
}

fn assert_nodes(found: &[f64], expected: &[f64], what: &str) {
    assert_eq!(found.len(), expected.len(), "{what}");
    for (v, (a, b)) in found.iter().zip(expected).enumerate() {
        assert!(close(*a, *b, TOL), "{what}: node {v} brandes {a} oracle {b}");
    }
}

fn assert_edges(cv: &projgraph::CentralityVector, expected: &[((usize, usize), f64)], what: &str) {
    let keys: Vec<_> = cv.edges.iter().map(|e| (e.low(), e.high())).collect();
    let oracle_keys: Vec<_> = expected.iter().map(|e| e.0).collect();
    assert_eq!(keys, oracle_keys, "{what}");
    for (s, (k, o)) in cv.scores.iter().zip(expected) {
        assert!(close(*s, *o, TOL), "{what}: edge {k:?} brandes {s} oracle {o}");
    }
}

#[test]
fn social_betweenness_matches_path_enumeration() {
    for seed in 0..200 {
        let g = small_graph(seed);
        let lg = LengthGraph::unit(&g);
        let node_oracle = common::node_betweenness(&lg);
        let edge_oracle = common::edge_betweenness(&lg);
        for exec in [Execution::Sequential, Execution::Parallel] {
            let cb = node_betweenness(&g, DistanceMode::Unit, false, exec).unwrap();
            assert_nodes(&cb.scores, &node_oracle, &format!("seed {seed} node"));
            let eb = edge_betweenness(&g, DistanceMode::Unit, false, exec).unwrap();
            assert_edges(&eb, &edge_oracle, &format!("seed {seed} edge"));
        }
        let n = g.node_count() as f64;
        let norm = node_betweenness(&g, DistanceMode::Unit, true, Execution::Sequential).unwrap();
        let scaled: Vec<f64> = node_oracle.iter().map(|x| x * 2.0 / ((n - 1.0) * (n - 2.0))).collect();
        assert_nodes(&norm.scores, &scaled, &format!("seed {seed} normalized node"));
        let norm = edge_betweenness(&g, DistanceMode::Unit, true, Execution::Sequential).unwrap();
        let scaled: Vec<_> = edge_oracle.iter().map(|&(k, x)| (k, x * 2.0 / (n * (n - 1.0)))).collect();
        assert_edges(&norm, &scaled, &format!("seed {seed} normalized edge"));
    }
}

#[test]
fn projection_betweenness_matches_path_enumeration() {
    for seed in 0..50 {
        let g = small_graph(1000 + seed);
        let m = small_mapping(g.node_count(), seed);
        let pg = build_projection(&g, &m).unwrap();
        for (mode, unit) in [(DistanceMode::Unit, true), (DistanceMode::InverseWeight, false)] {
            let lg = LengthGraph::projection(&pg, unit);
            let cb = node_betweenness(&pg, mode, false, Execution::Parallel).unwrap();
            assert_nodes(&cb.scores, &common::node_betweenness(&lg), &format!("seed {seed} {mode}"));
            let eb = edge_betweenness(&pg, mode, false, Execution::Parallel).unwrap();
            assert_edges(&eb, &common::edge_betweenness(&lg), &format!("seed {seed} {mode}"));
        }
    }
}

#[test]
fn weighted_multigraph_ties() {
    // lengths 1/2 + 1/2 tie with the direct length 1 edge
    let pg = projgraph::ProjectionGraph::from_weighted_edges(
        5,
        [(0, 1, 2), (1, 2, 2), (0, 2, 1), (2, 3, 3), (3, 4, 1), (0, 4, 4), (1, 3, 6)],
    )
    .unwrap();
    let lg = LengthGraph::projection(&pg, false);
    let cb = node_betweenness(&pg, DistanceMode::InverseWeight, false, Execution::Sequential).unwrap();
    assert_nodes(&cb.scores, &common::node_betweenness(&lg), "ties");
    let eb = edge_betweenness(&pg, DistanceMode::InverseWeight, false, Execution::Sequential).unwrap();
    assert_edges(&eb, &common::edge_betweenness(&lg), "ties");
}

fn check_node(d: &NodeDecomposition, oracle: [f64; 4], what: &str) {
    assert!(d.residual() <= TOL, "{what}: residual {}", d.residual());
    for (c, (a, b)) in d.categories.iter().zip(oracle).enumerate() {
        assert!(close(*a, b, TOL), "{what}: category {c} {a} vs {b}");
    }
}

fn check_edge(d: &EdgeDecomposition, oracle: [f64; 5], what: &str) {
    assert!(d.residual() <= TOL, "{what}: residual {}", d.residual());
    for (c, (a, b)) in d.categories.iter().zip(oracle).enumerate() {
        assert!(close(*a, b, TOL), "{what}: category {c} {a} vs {b}");
    }
}

#[test]
fn decompositions_sum_to_totals_and_match_enumeration() {
    for seed in 0..50 {
        let g = small_graph(2000 + seed);
        let m = small_mapping(g.node_count(), seed);
        for u in 0..g.node_count() {
            let d = betweenness_decomposition_check(&g, &m, u).unwrap();
            check_node(&d, common::node_categories(&g, &m, u), &format!("seed {seed} user {u}"));
        }
        for (a, b) in g.edges() {
            let d = edge_decomposition_check(&g, &m, EdgeKey::new(a, b).unwrap()).unwrap();
            check_edge(&d, common::edge_categories(&g, &m, a, b), &format!("seed {seed} edge {a}-{b}"));
        }
    }
}
