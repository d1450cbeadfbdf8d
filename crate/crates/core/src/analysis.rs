//! Correlation between cumulative user scores and peer scores across a sweep
//! of average community sizes, together with the mean-score curves and edge
//! balance recorded at each point.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::centrality::{
    cumulative_estimate, degree_centrality, edge_betweenness, node_betweenness, CentralityError,
    CentralityVector, DistanceMode, Metric,
};
use crate::community::{merge_to_target, CommunityError, Mapping, MergeWarning};
use crate::graph::SocialGraph;
use crate::par::{self, Execution};
use crate::projection::{build_projection, edge_balance_report, EdgeBalance, ProjectionGraph};

/// Average community sizes swept by default.
pub const DEFAULT_TARGETS: [usize; 9] = [5, 10, 20, 50, 100, 200, 300, 500, 1000];

#[derive(Debug, Error, PartialEq)]
pub enum PearsonError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("correlation undefined for a constant vector")]
    Constant,
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("sweep targets must be non-empty and strictly ascending")]
    BadTargets,
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, PearsonError> {
    if xs.len() != ys.len() {
        return Err(PearsonError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(PearsonError::TooFewSamples(n));
    }
    if xs.iter().all(|&x| x == xs[0]) || ys.iter().all(|&y| y == ys[0]) {
        return Err(PearsonError::Constant);
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(PearsonError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// One `{cumulative user score, peer score}` correlation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationPoint {
    pub target: usize,
    pub avg_community_size: f64,
    pub metric: Metric,
    pub distance: DistanceMode,
    /// `None` when undefined (constant vector or fewer than two samples).
    pub pearson_r: Option<f64>,
    pub sample_count: usize,
}

/// Means of the two sides of a correlation point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub target: usize,
    pub avg_community_size: f64,
    pub metric: Metric,
    pub distance: DistanceMode,
    pub mean_user_cumulative: f64,
    pub mean_peer: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancePoint {
    pub target: usize,
    pub avg_community_size: f64,
    pub balance: EdgeBalance,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Strictly ascending target average community sizes.
    pub targets: Vec<usize>,
    pub metrics: Vec<Metric>,
    /// Projection-graph length functions for the betweenness metrics.
    pub distance_modes: Vec<DistanceMode>,
    pub exec: Execution,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            targets: DEFAULT_TARGETS.to_vec(),
            metrics: vec![Metric::Degree, Metric::NodeBetweenness, Metric::EdgeBetweenness],
            distance_modes: vec![DistanceMode::InverseWeight, DistanceMode::Unit],
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub points: Vec<CorrelationPoint>,
    pub curves: Vec<CurvePoint>,
    pub balance: Vec<BalancePoint>,
    /// Merge warnings keyed by target.
    pub warnings: Vec<(usize, MergeWarning)>,
}

impl SweepReport {
    /// Target whose mean peer score is largest for `(metric, distance)`.
    pub fn turning_point(&self, metric: Metric, distance: DistanceMode) -> Option<&CurvePoint> {
        self.curves
            .iter()
            .filter(|c| c.metric == metric && c.distance == distance)
            .fold(None, |best: Option<&CurvePoint>, c| match best {
                Some(b) if b.mean_peer >= c.mean_peer => Some(b),
                _ => Some(c),
            })
    }

    /// First target where a peer holds more social edges on average than a
    /// peer edge carries.
    pub fn intra_inter_crossover(&self) -> Option<&BalancePoint> {
        self.balance
            .iter()
            .find(|b| b.balance.avg_intra_per_peer > b.balance.avg_inter_per_pg_edge)
    }

    pub fn point(&self, target: usize, metric: Metric, distance: DistanceMode) -> Option<&CorrelationPoint> {
        self.points
            .iter()
            .find(|p| p.target == target && p.metric == metric && p.distance == distance)
    }
}

struct UserScores {
    degree: Option<CentralityVector>,
    node: Option<CentralityVector>,
    edge: Option<CentralityVector>,
}

fn user_scores(g: &SocialGraph, metrics: &[Metric], exec: Execution) -> Result<UserScores, AnalysisError> {
    let n = g.node_count();
    let want = |m| metrics.contains(&m);
    Ok(UserScores {
        degree: want(Metric::Degree).then(|| degree_centrality(g, n >= 2)),
        node: match want(Metric::NodeBetweenness) {
            true => Some(node_betweenness(g, DistanceMode::Unit, n >= 3, exec)?),
            false => None,
        },
        edge: match want(Metric::EdgeBetweenness) {
            true => Some(edge_betweenness(g, DistanceMode::Unit, n >= 2, exec)?),
            false => None,
        },
    })
}

fn peer_vector(
    pg: &ProjectionGraph,
    metric: Metric,
    mode: DistanceMode,
    exec: Execution,
) -> Result<CentralityVector, CentralityError> {
    let n = pg.peer_count();
    match metric {
        Metric::Degree => Ok(degree_centrality(pg, n >= 2)),
        Metric::NodeBetweenness => node_betweenness(pg, mode, n >= 3, exec),
        Metric::EdgeBetweenness => edge_betweenness(pg, mode, n >= 2, exec),
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Merges `base` up to each target in turn and records, per target, the
/// correlation and mean of cumulative user scores against peer scores for
/// every requested metric and distance mode. Scores are normalized where the
/// graph is large enough for it.
pub fn run_sweep(
    g: &SocialGraph,
    base: &Mapping,
    config: &SweepConfig,
) -> Result<SweepReport, AnalysisError> {
    if config.targets.is_empty() || config.targets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::BadTargets);
    }
    base.check_covers(g)?;

    let mut mappings = Vec::with_capacity(config.targets.len());
    let mut warnings = Vec::new();
    let mut current = base.clone();
    for &t in &config.targets {
        let out = merge_to_target(g, &current, t)?;
        if let Some(w) = out.warning {
            warnings.push((t, w));
        }
        current = out.mapping;
        mappings.push(current.clone());
    }

    let users = user_scores(g, &config.metrics, config.exec)?;
    // targets run one after another; betweenness inside each is parallel
    let per_target = par::map_indexed(Execution::Sequential, mappings.len(), |i| {
        sweep_point(g, &mappings[i], config.targets[i], &users, config)
    });

    let mut report = SweepReport {
        warnings,
        ..SweepReport::default()
    };
    for result in per_target {
        let (points, curves, balance) = result?;
        report.points.extend(points);
        report.curves.extend(curves);
        report.balance.push(balance);
    }
    Ok(report)
}

type TargetRows = (Vec<CorrelationPoint>, Vec<CurvePoint>, BalancePoint);

fn sweep_point(
    g: &SocialGraph,
    mapping: &Mapping,
    target: usize,
    users: &UserScores,
    config: &SweepConfig,
) -> Result<TargetRows, AnalysisError> {
    let pg = build_projection(g, mapping)?;
    let avg = mapping.mean_size();
    let mut points = Vec::new();
    let mut curves = Vec::new();
    for &metric in &config.metrics {
        let user_vec = match metric {
            Metric::Degree => users.degree.as_ref(),
            Metric::NodeBetweenness => users.node.as_ref(),
            Metric::EdgeBetweenness => users.edge.as_ref(),
        }
        .expect("computed for every requested metric");
        let cumulative = cumulative_estimate(user_vec, mapping, &pg)?;
        let modes: &[DistanceMode] = match metric {
            Metric::Degree => &[DistanceMode::Unit],
            _ => &config.distance_modes,
        };
        for &mode in modes {
            let peer = peer_vector(&pg, metric, mode, config.exec)?;
            points.push(CorrelationPoint {
                target,
                avg_community_size: avg,
                metric,
                distance: mode,
                pearson_r: pearson(&cumulative.scores, &peer.scores).ok(),
                sample_count: peer.len(),
            });
            curves.push(CurvePoint {
                target,
                avg_community_size: avg,
                metric,
                distance: mode,
                mean_user_cumulative: mean(&cumulative.scores),
                mean_peer: mean(&peer.scores),
            });
        }
    }
    let balance = BalancePoint {
        target,
        avg_community_size: avg,
        balance: edge_balance_report(&pg),
    };
    Ok((points, curves, balance))
}

/// Correlation points of a sweep.
pub fn correlation_sweep(
    g: &SocialGraph,
    base: &Mapping,
    config: &SweepConfig,
) -> Result<Vec<CorrelationPoint>, AnalysisError> {
    Ok(run_sweep(g, base, config)?.points)
}

/// Mean-score curves of a sweep.
pub fn mean_score_curves(
    g: &SocialGraph,
    base: &Mapping,
    config: &SweepConfig,
) -> Result<Vec<CurvePoint>, AnalysisError> {
    Ok(run_sweep(g, base, config)?.curves)
}

/// Values sorted descending with 1-based ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    pub entries: Vec<(usize, f64)>,
}

pub fn rank_frequency<I>(values: I) -> RankDistribution
where
    I: IntoIterator,
    I::Item: Into<f64>,
{
    let mut v: Vec<f64> = values.into_iter().map(Into::into).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    RankDistribution {
        entries: v.into_iter().enumerate().map(|(i, x)| (i + 1, x)).collect(),
    }
}

/// `avg_size,metric,distance_mode,pearson_r,defined,sample_count`
pub fn write_sweep_csv<W: Write>(points: &[CorrelationPoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["avg_size", "metric", "distance_mode", "pearson_r", "defined", "sample_count"])?;
    for p in points {
        w.write_record([
            p.avg_community_size.to_string(),
            p.metric.to_string(),
            p.distance.to_string(),
            p.pearson_r.map_or(String::new(), |r| r.to_string()),
            p.pearson_r.is_some().to_string(),
            p.sample_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `avg_size,metric,distance_mode,mean_user_cumulative,mean_peer`
pub fn write_curves_csv<W: Write>(curves: &[CurvePoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["avg_size", "metric", "distance_mode", "mean_user_cumulative", "mean_peer"])?;
    for c in curves {
        w.write_record([
            c.avg_community_size.to_string(),
            c.metric.to_string(),
            c.distance.to_string(),
            c.mean_user_cumulative.to_string(),
            c.mean_peer.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `avg_size,avg_intra_per_peer,avg_inter_per_pg_edge,inter_defined`
pub fn write_balance_csv<W: Write>(balance: &[BalancePoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["avg_size", "avg_intra_per_peer", "avg_inter_per_pg_edge", "inter_defined"])?;
    for b in balance {
        w.write_record([
            b.avg_community_size.to_string(),
            b.balance.avg_intra_per_peer.to_string(),
            b.balance.avg_inter_per_pg_edge.to_string(),
            b.balance.inter_defined.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
