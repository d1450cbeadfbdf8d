//! End-to-end runs on seeded synthetic graphs small enough for the fast
//! suite. They check directions and shapes, not the published numbers.

use projgraph::analysis::{rank_frequency, run_sweep, SweepConfig};
use projgraph::community::{louvain, louvain_hierarchy, merge_to_target, modularity, recursive_louvain};
use projgraph::search::{run_experiment, ExperimentConfig, TechniqueKind, WorkloadKind};
use projgraph::{build_projection, synth, DistanceMode, Layer, Mapping, Metric};

#[test]
fn louvain_recovers_planted_blocks() {
    let g = synth::planted_communities(12, 20, 0.5, 2, 0, 3);
    let m = louvain(&g, 1);
    let planted: Vec<usize> = (0..g.node_count()).map(|u| u / 20).collect();
    let q = modularity(&g, &m).unwrap();
    let q_planted = modularity(&g, &Mapping::from_labels(&planted)).unwrap();
    assert!(q >= q_planted - 1e-9, "{q} < {q_planted}");
    assert_eq!(m.peer_count(), 12);
}

#[test]
fn recursive_louvain_respects_cap_on_clustered_graph() {
    let g = synth::powerlaw_cluster(2000, 2, 0.3, 8);
    let m = recursive_louvain(&g, 50, 4).unwrap();
    let stats = m.stats();
    assert!(stats.max_size <= 75, "{stats:?}");
    assert_eq!(m.sizes().iter().sum::<usize>(), 2000);
    let ranks = rank_frequency(m.sizes().into_iter().map(|s| s as u32));
    assert!(ranks.entries.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn correlations_start_high_and_edges_concentrate_inside_peers() {
    let g = synth::powerlaw_cluster(1500, 3, 0.5, 1);
    let base = louvain_hierarchy(&g, 1).swap_remove(0);
    let start = base.mean_size().ceil() as usize + 1;
    let config = SweepConfig {
        targets: vec![start, 2 * start, 4 * start],
        metrics: vec![Metric::Degree, Metric::NodeBetweenness],
        distance_modes: vec![DistanceMode::InverseWeight],
        ..SweepConfig::default()
    };
    let report = run_sweep(&g, &base, &config).unwrap();
    let first = report.point(start, Metric::Degree, DistanceMode::Unit).unwrap();
    assert!(first.pearson_r.unwrap() > 0.8, "{first:?}");
    let nb = report
        .point(start, Metric::NodeBetweenness, DistanceMode::InverseWeight)
        .unwrap();
    assert!(nb.pearson_r.unwrap() > 0.5, "{nb:?}");
    let intra: Vec<f64> = report.balance.iter().map(|b| b.balance.avg_intra_per_peer).collect();
    assert!(intra.windows(2).all(|w| w[0] < w[1]), "{intra:?}");
    assert!(report.intra_inter_crossover().is_some());
    assert!(report.turning_point(Metric::Degree, DistanceMode::Unit).is_some());
}

#[test]
fn team_builder_succeeds_at_least_as_often_as_person_finder() {
    let g = synth::powerlaw_cluster(1500, 2, 0.3, 6);
    let base = recursive_louvain(&g, 100, 2).unwrap();
    let target = 2 * base.mean_size().ceil() as usize;
    let m = merge_to_target(&g, &base, target).unwrap().mapping;
    let pg = build_projection(&g, &m).unwrap();
    let run = |workload| {
        let config = ExperimentConfig {
            workload,
            n_percents: vec![10, 20],
            s_fraction: 0.1,
            seed: 9,
            ..ExperimentConfig::default()
        };
        run_experiment(&g, &m, &pg, &config).unwrap()
    };
    let pf = run(WorkloadKind::PersonFinder);
    let tb = run(WorkloadKind::TeamBuilder);
    for (a, b) in pf.summaries.iter().zip(&tb.summaries) {
        assert_eq!((a.technique, a.layer, a.n_percent), (b.technique, b.layer, b.n_percent));
        assert!(b.success_rate >= a.success_rate, "{a:?} vs {b:?}");
    }
}

#[test]
fn ranked_forwarding_reaches_targets_in_fewer_hops_than_random() {
    let g = synth::powerlaw_cluster(2000, 3, 0.5, 1);
    let m = recursive_louvain(&g, 100, 1).unwrap();
    let pg = build_projection(&g, &m).unwrap();
    let config = ExperimentConfig {
        techniques: vec![TechniqueKind::PeerDegree, TechniqueKind::Random],
        n_percents: vec![20],
        layers: vec![Layer::Social],
        s_fraction: 0.15,
        seed: 4,
        ..ExperimentConfig::default()
    };
    let r = run_experiment(&g, &m, &pg, &config).unwrap();
    let degree = r.summary(TechniqueKind::PeerDegree, Layer::Social, 20).unwrap();
    let random = r.summary(TechniqueKind::Random, Layer::Social, 20).unwrap();
    assert!(degree.hops_p50 <= random.hops_p50, "{degree:?} vs {random:?}");
}
