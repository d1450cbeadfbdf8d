use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use projgraph::analysis::{self, SweepConfig, DEFAULT_TARGETS};
use projgraph::centrality::{
    cumulative_estimate, degree_centrality, edge_betweenness, node_betweenness,
};
use projgraph::community::{
    jaccard_assign, merge_to_target, modularity, parse_groups, parse_mapping_csv,
    recursive_louvain, write_mapping_csv, MergeWarning,
};
use projgraph::graph::{largest_connected_component, load_edge_list, write_edge_list, write_id_map};
use projgraph::projection::edge_balance_report;
use projgraph::search::{run_experiment, ExperimentConfig, Forwarding, TechniqueKind, WorkloadKind};
use projgraph::{
    build_projection, CentralityVector, DistanceMode, Execution, Layer, Mapping, Metric,
    ProjectionGraph, SocialGraph,
};

use crate::error::CliError;
use crate::output::{describe_input, Artifacts, Manifest};
use crate::{
    CentralityArgs, Common, CommunitiesArgs, CorrelateArgs, DistanceArg, ForwardingArg, LayerArg,
    LccArgs, MergeArgs, MetricArg, ProjectArgs, SearchArgs, TechniqueArg, WorkloadArg,
};

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Degree => Metric::Degree,
            MetricArg::NodeBetweenness => Metric::NodeBetweenness,
            MetricArg::EdgeBetweenness => Metric::EdgeBetweenness,
        }
    }
}

impl From<DistanceArg> for DistanceMode {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::Unit => DistanceMode::Unit,
            DistanceArg::InverseWeight => DistanceMode::InverseWeight,
        }
    }
}

impl From<TechniqueArg> for TechniqueKind {
    fn from(t: TechniqueArg) -> Self {
        match t {
            TechniqueArg::PeerDegree => TechniqueKind::PeerDegree,
            TechniqueArg::PeerBetweenness => TechniqueKind::PeerBetweenness,
            TechniqueArg::PgEdgeBetweenness => TechniqueKind::PgEdgeBetweenness,
            TechniqueArg::Random => TechniqueKind::Random,
        }
    }
}

/// Thread pool and execution policy for one run, plus the bookkeeping shared
/// by every command.
struct Run {
    command: &'static str,
    common: Common,
    threads: usize,
    exec: Execution,
    inputs: Vec<Value>,
    started: Instant,
}

impl Run {
    fn start(command: &'static str, common: &Common) -> Result<Self, CliError> {
        let started = Instant::now();
        let threads = if common.threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            common.threads
        };
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot start {threads} threads: {e}")))?;
        Ok(Run {
            command,
            common: common.clone(),
            threads,
            exec: Execution::from_threads(threads),
            inputs: vec![describe_input("edges", &common.edges)],
            started,
        })
    }

    fn load_graph(&self) -> Result<SocialGraph, CliError> {
        Ok(load_edge_list(&self.common.edges)?)
    }

    /// The input graph's largest connected component.
    fn load_lcc(&self) -> Result<SocialGraph, CliError> {
        let g = self.load_graph()?;
        Ok(largest_connected_component(&g)?.0)
    }

    fn load_mapping(&mut self, path: &Path, g: &SocialGraph) -> Result<Mapping, CliError> {
        self.inputs.push(describe_input("mapping", path));
        let reader = open(path)?;
        Ok(parse_mapping_csv(reader, g)?)
    }

    /// The mapping at `path`, or recursive Louvain communities when absent.
    fn mapping_or_louvain(
        &mut self,
        path: Option<&Path>,
        g: &SocialGraph,
        max_size: usize,
    ) -> Result<Mapping, CliError> {
        match path {
            Some(p) => self.load_mapping(p, g),
            None => Ok(recursive_louvain(g, max_size, self.common.seed)?),
        }
    }

    fn finish(self, artifacts: Artifacts) -> Result<(), CliError> {
        artifacts.write(
            &self.common.out,
            Manifest {
                command: self.command,
                seed: self.common.seed,
                threads: self.threads,
                inputs: self.inputs,
                started: self.started,
            },
        )
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn config_json<C: Serialize>(command: &str, args: &C) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    v["command"] = json!(command);
    v
}

fn graph_summary(g: &SocialGraph) -> Value {
    json!({ "nodes": g.node_count(), "edges": g.edge_count() })
}

fn warning_json(w: &MergeWarning) -> Value {
    match w {
        MergeWarning::NoConnectedPair { community_count } => {
            json!({ "kind": "no_connected_pair", "community_count": community_count })
        }
        MergeWarning::MeanOutsideTolerance { achieved } => {
            json!({ "kind": "mean_outside_tolerance", "achieved_mean": achieved })
        }
    }
}

fn stage_partition(
    artifacts: &mut Artifacts,
    g: &SocialGraph,
    m: &Mapping,
) -> Result<Value, CliError> {
    artifacts.csv("mapping.csv", |buf| Ok(write_mapping_csv(g, m, buf)?))?;
    let stats = m.stats();
    artifacts.csv("community_stats.csv", |buf| Ok(stats.write_csv(buf)?))?;
    let mut sizes = m.sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    artifacts.csv("community_sizes.csv", |buf| {
        use std::io::Write;
        writeln!(buf, "rank,size")?;
        for (i, s) in sizes.iter().enumerate() {
            writeln!(buf, "{},{s}", i + 1)?;
        }
        Ok(())
    })?;
    let q = modularity(g, m).ok();
    Ok(json!({ "stats": stats, "modularity": q }))
}

pub fn lcc(args: LccArgs) -> Result<(), CliError> {
    let run = Run::start("lcc", &args.common)?;
    let g = run.load_graph()?;
    let (lcc, _) = largest_connected_component(&g)?;
    let mut artifacts = Artifacts::new(&config_json("lcc", &args));
    artifacts.csv("lcc_edges.txt", |buf| Ok(write_edge_list(&lcc, buf)?))?;
    artifacts.csv("id_map.csv", |buf| Ok(write_id_map(&lcc, buf)?))?;
    artifacts.summary = json!({
        "input": graph_summary(&g),
        "lcc": graph_summary(&lcc),
    });
    run.finish(artifacts)
}

pub fn communities(args: CommunitiesArgs) -> Result<(), CliError> {
    let mut run = Run::start("communities", &args.common)?;
    let g = run.load_lcc()?;
    let (m, method) = match &args.groups {
        Some(path) => {
            run.inputs.push(describe_input("groups", path));
            let groups = parse_groups(open(path)?, &g)?;
            (jaccard_assign(&g, &groups)?, "jaccard_groups")
        }
        None => (
            recursive_louvain(&g, args.max_size, args.common.seed)?,
            "recursive_louvain",
        ),
    };
    let mut artifacts = Artifacts::new(&config_json("communities", &args));
    let mut summary = stage_partition(&mut artifacts, &g, &m)?;
    summary["method"] = json!(method);
    summary["graph"] = graph_summary(&g);
    artifacts.summary = summary;
    run.finish(artifacts)
}

pub fn merge(args: MergeArgs) -> Result<(), CliError> {
    let mut run = Run::start("merge", &args.common)?;
    let g = run.load_lcc()?;
    let base = run.load_mapping(&args.mapping, &g)?;
    let outcome = merge_to_target(&g, &base, args.target_avg)?;
    let mut artifacts = Artifacts::new(&config_json("merge", &args));
    let mut summary = stage_partition(&mut artifacts, &g, &outcome.mapping)?;
    summary["input_mean_size"] = json!(base.mean_size());
    summary["warning"] = outcome.warning.as_ref().map_or(Value::Null, warning_json);
    if let Some(w) = &outcome.warning {
        eprintln!("warning: {}", warning_json(w));
    }
    artifacts.summary = summary;
    run.finish(artifacts)
}

pub fn project(args: ProjectArgs) -> Result<(), CliError> {
    let mut run = Run::start("project", &args.common)?;
    let g = run.load_lcc()?;
    let m = run.load_mapping(&args.mapping, &g)?;
    let pg = build_projection(&g, &m)?;
    let balance = edge_balance_report(&pg);
    let degree = degree_centrality(&pg, false);

    let mut artifacts = Artifacts::new(&config_json("project", &args));
    artifacts.csv("pg_edges.csv", |buf| Ok(pg.write_edges_csv(buf)?))?;
    artifacts.csv("pg_peers.csv", |buf| Ok(pg.write_peers_csv(buf)?))?;
    artifacts.csv("edge_balance.csv", |buf| {
        use std::io::Write;
        writeln!(buf, "avg_intra_per_peer,avg_inter_per_pg_edge,inter_defined")?;
        writeln!(
            buf,
            "{},{},{}",
            balance.avg_intra_per_peer, balance.avg_inter_per_pg_edge, balance.inter_defined
        )?;
        Ok(())
    })?;
    artifacts.csv("peer_degree_ranks.csv", |buf| {
        use std::io::Write;
        writeln!(buf, "rank,peer_id,degree")?;
        for (rank, p) in degree.ranking().into_iter().enumerate() {
            writeln!(buf, "{},{p},{}", rank + 1, degree.scores[p])?;
        }
        Ok(())
    })?;
    artifacts.summary = json!({
        "graph": graph_summary(&g),
        "peers": pg.peer_count(),
        "pg_edges": pg.edge_count(),
        "total_weight": pg.total_weight(),
        "total_intra": pg.total_intra(),
        "connected": pg.is_connected(),
        "avg_intra_per_peer": balance.avg_intra_per_peer,
        "avg_inter_per_pg_edge": balance.inter_defined.then_some(balance.avg_inter_per_pg_edge),
    });
    run.finish(artifacts)
}

/// Lets the social and projection graphs share one metric dispatch.
trait ScoreTarget {
    fn score(
        &self,
        metric: Metric,
        mode: DistanceMode,
        normalize: bool,
        exec: Execution,
    ) -> Result<CentralityVector, CliError>;
}

impl<G: projgraph::Topology> ScoreTarget for G {
    fn score(
        &self,
        metric: Metric,
        mode: DistanceMode,
        normalize: bool,
        exec: Execution,
    ) -> Result<CentralityVector, CliError> {
        Ok(match metric {
            Metric::Degree => degree_centrality(self, normalize),
            Metric::NodeBetweenness => node_betweenness(self, mode, normalize, exec)?,
            Metric::EdgeBetweenness => edge_betweenness(self, mode, normalize, exec)?,
        })
    }
}

fn describe_vector(cv: &CentralityVector) -> Value {
    json!({
        "scope": cv.scope.as_str(),
        "distance_mode": cv.distance.as_str(),
        "normalized": cv.normalized,
        "degenerate": cv.degenerate,
        "count": cv.len(),
        "mean": cv.mean(),
    })
}

pub fn centrality(args: CentralityArgs) -> Result<(), CliError> {
    let mut run = Run::start("centrality", &args.common)?;
    let g = run.load_lcc()?;
    let metric = Metric::from(args.metric);
    let projected: Option<(Mapping, ProjectionGraph)> = match &args.mapping {
        Some(path) => {
            let m = run.load_mapping(path, &g)?;
            let pg = build_projection(&g, &m)?;
            Some((m, pg))
        }
        None => None,
    };

    let sg = g.score(metric, DistanceMode::Unit, args.normalize, run.exec)?;
    let mut summary = json!({ "graph": graph_summary(&g), "sg": describe_vector(&sg) });
    let mut artifacts = Artifacts::new(&config_json("centrality", &args));
    let user_label = |u: usize| g.external_id(u);
    artifacts.csv(&format!("sg_{metric}.csv"), |buf| Ok(sg.write_rows(buf, &user_label)?))?;

    if let Some((m, pg)) = &projected {
        let mode = DistanceMode::from(args.distance_mode);
        let peer = pg.score(metric, mode, args.normalize, run.exec)?;
        // Cumulative sums use raw user scores so they stay comparable across
        // mappings; normalization only rescales and keeps the ranking.
        let cumulative = cumulative_estimate(&sg, m, pg)?;
        let peer_label = |p: usize| p as u64;
        artifacts.csv(&format!("pg_{metric}.csv"), |buf| Ok(peer.write_rows(buf, &peer_label)?))?;
        artifacts.csv(&format!("cumulative_{metric}.csv"), |buf| {
            Ok(cumulative.write_rows(buf, &peer_label)?)
        })?;
        let r = analysis::pearson(&cumulative.scores, &peer.scores).ok();
        summary["pg"] = describe_vector(&peer);
        summary["cumulative"] = describe_vector(&cumulative);
        summary["pearson_r"] = json!(r);
    }
    artifacts.summary = summary;
    run.finish(artifacts)
}

pub fn correlate(args: CorrelateArgs) -> Result<(), CliError> {
    let mut run = Run::start("correlate", &args.common)?;
    let g = run.load_lcc()?;
    let base = run.mapping_or_louvain(args.mapping.as_deref(), &g, args.max_size)?;
    let base_mean = base.mean_size();

    let mut skipped = Vec::new();
    let targets: Vec<usize> = if args.target_avg.is_empty() {
        let (keep, drop): (Vec<usize>, Vec<usize>) = DEFAULT_TARGETS
            .iter()
            .partition(|&&t| t as f64 >= base_mean - 1e-9);
        skipped = drop;
        if keep.is_empty() {
            return Err(CliError::Infeasible(format!(
                "every default target is below the starting mean community size {base_mean:.3}"
            )));
        }
        keep
    } else {
        args.target_avg.clone()
    };
    let metrics: Vec<Metric> = if args.metric.is_empty() {
        SweepConfig::default().metrics
    } else {
        args.metric.iter().map(|&m| m.into()).collect()
    };
    let distance_modes: Vec<DistanceMode> = if args.distance_mode.is_empty() {
        SweepConfig::default().distance_modes
    } else {
        args.distance_mode.iter().map(|&d| d.into()).collect()
    };
    let config = SweepConfig {
        targets: targets.clone(),
        metrics: metrics.clone(),
        distance_modes: distance_modes.clone(),
        exec: run.exec,
    };
    let report = analysis::run_sweep(&g, &base, &config)?;

    let mut artifacts = Artifacts::new(&config_json("correlate", &args));
    artifacts.csv("sweep.csv", |buf| Ok(analysis::write_sweep_csv(&report.points, buf)?))?;
    artifacts.csv("curves.csv", |buf| Ok(analysis::write_curves_csv(&report.curves, buf)?))?;
    artifacts.csv("edge_balance.csv", |buf| {
        Ok(analysis::write_balance_csv(&report.balance, buf)?)
    })?;

    let mut turning = Vec::new();
    for &metric in &metrics {
        let modes: &[DistanceMode] = if metric == Metric::Degree {
            &[DistanceMode::Unit]
        } else {
            &distance_modes
        };
        for &mode in modes {
            if let Some(p) = report.turning_point(metric, mode) {
                turning.push(json!({
                    "metric": metric.as_str(),
                    "distance_mode": mode.as_str(),
                    "target": p.target,
                    "avg_size": p.avg_community_size,
                    "mean_peer": p.mean_peer,
                }));
            }
        }
    }
    let crossover = report.intra_inter_crossover().map(|b| {
        json!({ "target": b.target, "avg_size": b.avg_community_size })
    });
    let warnings: Vec<Value> = report
        .warnings
        .iter()
        .map(|(t, w)| {
            let mut v = warning_json(w);
            v["target"] = json!(t);
            v
        })
        .collect();
    artifacts.summary = json!({
        "graph": graph_summary(&g),
        "base_mean_size": base_mean,
        "targets": targets,
        "skipped_default_targets": skipped,
        "turning_points": turning,
        "intra_inter_crossover": crossover,
        "merge_warnings": warnings,
    });
    run.finish(artifacts)
}

pub fn search(args: SearchArgs) -> Result<(), CliError> {
    let mut run = Run::start("search", &args.common)?;
    let g = run.load_lcc()?;
    let m = run.mapping_or_louvain(args.mapping.as_deref(), &g, args.max_size)?;
    let pg = build_projection(&g, &m)?;

    let defaults = ExperimentConfig::default();
    let config = ExperimentConfig {
        workload: match args.workload {
            WorkloadArg::PersonFinder => WorkloadKind::PersonFinder,
            WorkloadArg::TeamBuilder => WorkloadKind::TeamBuilder,
        },
        techniques: if args.technique.is_empty() {
            defaults.techniques
        } else {
            args.technique.iter().map(|&t| t.into()).collect()
        },
        n_percents: args.n_percent.clone(),
        layers: if args.layer.is_empty() {
            defaults.layers
        } else {
            args.layer
                .iter()
                .map(|l| match l {
                    LayerArg::Sg => Layer::Social,
                    LayerArg::Pg => Layer::Projection,
                })
                .collect()
        },
        s_fraction: args.s_fraction,
        d_fraction: args.d_fraction,
        distance: args.distance_mode.into(),
        forwarding: match args.forwarding {
            ForwardingArg::SkipVisited => Forwarding::SkipVisited,
            ForwardingArg::Fixed => Forwarding::Fixed,
        },
        seed: args.common.seed,
        exec: run.exec,
    };
    let report = run_experiment(&g, &m, &pg, &config)?;

    let mut artifacts = Artifacts::new(&config_json("search", &args));
    artifacts.csv("search_outcomes.csv", |buf| Ok(report.write_outcomes_csv(buf)?))?;
    artifacts.csv("search_summary.csv", |buf| Ok(report.write_summary_csv(buf)?))?;
    let summaries: Vec<Value> = report
        .summaries
        .iter()
        .map(|s| {
            json!({
                "technique": s.technique.as_str(),
                "layer": s.layer.as_str(),
                "n_percent": s.n_percent,
                "success_rate": s.success_rate,
            })
        })
        .collect();
    artifacts.summary = json!({
        "graph": graph_summary(&g),
        "peers": report.peer_count,
        "workload": report.workload.as_str(),
        "queries": report.queries.len(),
        "success": summaries,
    });
    run.finish(artifacts)
}
