//! Search simulation over the social graph (application layer) and over the
//! projection graph (overlay layer).
//!
//! Queries spread as a synchronous flood: every user or peer on the frontier
//! forwards to its selected neighbours, a global visited set stops repeats,
//! and the hop count is the frontier depth at which the goal is first met.
//! Overlay selections are fixed per peer; social-layer selections are set by
//! [`Forwarding`].

use std::fmt;
use std::io::Write;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::centrality::{
    degree_centrality, edge_betweenness, node_betweenness, pg_edge_slot_scores, peer_scores,
    CentralityError, CentralityVector, DistanceMode, Metric,
};
use crate::community::{derive_seed, CommunityError, Mapping, PeerId};
use crate::graph::{Layer, SocialGraph, Topology, UserId};
use crate::par::{self, Execution};
use crate::projection::ProjectionGraph;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("n_percent must be in 1..=100, got {0}")]
    BadPercent(u32),
    #[error("team size must be at least 1")]
    ZeroTeam,
    #[error("{0} must be in (0, 1], got {1}")]
    BadFraction(&'static str, f64),
    #[error("s_fraction {0} of {1} users yields no queries")]
    NoQueries(f64, usize),
    #[error("search needs at least two users")]
    TooFewUsers,
    #[error("source and destination are both user {0}")]
    SameEndpoints(UserId),
    #[error("person-finder needs a destination, team-builder takes none")]
    DestinationMismatch,
    #[error("unknown user {0}")]
    UnknownUser(UserId),
    #[error("technique {0} needs peer {1} scores")]
    MissingCentrality(TechniqueKind, &'static str),
    #[error("projection has {found} peers, mapping has {expected}")]
    PeerCountMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TechniqueKind {
    #[serde(rename = "peer_degree_topN")]
    PeerDegree,
    #[serde(rename = "peer_betweenness_topN")]
    PeerBetweenness,
    #[serde(rename = "pg_edge_betweenness_topN")]
    PgEdgeBetweenness,
    #[serde(rename = "random_N")]
    Random,
}

impl TechniqueKind {
    pub const ALL: [TechniqueKind; 4] = [
        TechniqueKind::PeerDegree,
        TechniqueKind::PeerBetweenness,
        TechniqueKind::PgEdgeBetweenness,
        TechniqueKind::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TechniqueKind::PeerDegree => "peer_degree_topN",
            TechniqueKind::PeerBetweenness => "peer_betweenness_topN",
            TechniqueKind::PgEdgeBetweenness => "pg_edge_betweenness_topN",
            TechniqueKind::Random => "random_N",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for TechniqueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A forwarding technique at a given fan-out percentage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Technique {
    kind: TechniqueKind,
    n_percent: u32,
}

impl Technique {
    pub fn new(kind: TechniqueKind, n_percent: u32) -> Result<Self, SearchError> {
        if n_percent == 0 || n_percent > 100 {
            return Err(SearchError::BadPercent(n_percent));
        }
        Ok(Technique { kind, n_percent })
    }

    pub fn kind(&self) -> TechniqueKind {
        self.kind
    }

    pub fn n_percent(&self) -> u32 {
        self.n_percent
    }

    /// `max(1, ceil(n_percent% of count))`, for `count >= 1`.
    pub fn fan_out(&self, count: usize) -> usize {
        (count * self.n_percent as usize).div_ceil(100).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workload {
    /// Reach one given destination user.
    PersonFinder,
    /// Reach any `d` users spread over at least `ceil(sqrt(d))` peers.
    TeamBuilder { d: usize },
}

impl Workload {
    pub fn team(d: usize) -> Result<Self, SearchError> {
        if d == 0 {
            return Err(SearchError::ZeroTeam);
        }
        Ok(Workload::TeamBuilder { d })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Workload::PersonFinder => "person_finder",
            Workload::TeamBuilder { .. } => "team_builder",
        }
    }

    /// Distinct peers a team must span.
    pub fn required_communities(&self) -> usize {
        match *self {
            Workload::PersonFinder => 1,
            Workload::TeamBuilder { d } => (d as f64).sqrt().ceil() as usize,
        }
    }
}

/// Peer-level scores the ranking techniques read. Betweenness entries are
/// optional so degree-only runs skip the expensive computation.
#[derive(Debug, Clone)]
pub struct PeerRanking {
    degree: Vec<f64>,
    betweenness: Option<Vec<f64>>,
    /// Peer-edge betweenness indexed by projection adjacency slot.
    edge_slots: Option<Vec<f64>>,
}

impl PeerRanking {
    pub fn from_vectors(
        pg: &ProjectionGraph,
        degree: &CentralityVector,
        betweenness: Option<&CentralityVector>,
        edge: Option<&CentralityVector>,
    ) -> Result<Self, SearchError> {
        let check = |cv: &CentralityVector| -> Result<Vec<f64>, SearchError> {
            let s = peer_scores(cv)?;
            if s.len() != pg.peer_count() {
                return Err(SearchError::PeerCountMismatch {
                    expected: pg.peer_count(),
                    found: s.len(),
                });
            }
            Ok(s.to_vec())
        };
        Ok(PeerRanking {
            degree: check(degree)?,
            betweenness: betweenness.map(check).transpose()?,
            edge_slots: edge.map(|cv| pg_edge_slot_scores(cv, pg)).transpose()?,
        })
    }

    /// Computes the scores every technique in `kinds` needs.
    pub fn compute(
        pg: &ProjectionGraph,
        kinds: &[TechniqueKind],
        mode: DistanceMode,
        exec: Execution,
    ) -> Result<Self, SearchError> {
        let degree = degree_centrality(pg, false);
        let node = match kinds.contains(&TechniqueKind::PeerBetweenness) {
            true => Some(node_betweenness(pg, mode, false, exec)?),
            false => None,
        };
        let edge = match kinds.contains(&TechniqueKind::PgEdgeBetweenness) {
            true => Some(edge_betweenness(pg, mode, false, exec)?),
            false => None,
        };
        Self::from_vectors(pg, &degree, node.as_ref(), edge.as_ref())
    }

    fn require(&self, kind: TechniqueKind) -> Result<(), SearchError> {
        match kind {
            TechniqueKind::PeerBetweenness if self.betweenness.is_none() => {
                Err(SearchError::MissingCentrality(kind, Metric::NodeBetweenness.as_str()))
            }
            TechniqueKind::PgEdgeBetweenness if self.edge_slots.is_none() => {
                Err(SearchError::MissingCentrality(kind, Metric::EdgeBetweenness.as_str()))
            }
            _ => Ok(()),
        }
    }

    fn peer_count(&self) -> usize {
        self.degree.len()
    }
}

/// Peer edges each peer keeps open, and their union.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveConnectionSet {
    /// Neighbour peers activated by each peer, best first.
    chosen: Vec<Vec<u32>>,
    /// Undirected union of all activated edges, ascending per peer.
    union: Vec<Vec<u32>>,
}

impl ActiveConnectionSet {
    pub fn peer_count(&self) -> usize {
        self.chosen.len()
    }

    /// Edges peer `p` activated itself.
    pub fn chosen(&self, p: PeerId) -> &[u32] {
        &self.chosen[p]
    }

    /// Peers reachable from `p` over the union of active edges.
    pub fn neighbors(&self, p: PeerId) -> &[u32] {
        &self.union[p]
    }

    pub fn edge_count(&self) -> usize {
        self.union.iter().map(Vec::len).sum::<usize>() / 2
    }
}

fn rank_by_score(items: &mut [(u32, f64)]) {
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// Every peer ranks its incident peer edges (by the neighbour's degree, the
/// neighbour's betweenness, the edge's betweenness, or a seeded shuffle) and
/// keeps the top `max(1, ceil(n_percent% of degree))`.
pub fn build_active_sets(
    pg: &ProjectionGraph,
    ranking: &PeerRanking,
    t: Technique,
    seed: u64,
) -> Result<ActiveConnectionSet, SearchError> {
    ranking.require(t.kind)?;
    if ranking.peer_count() != pg.peer_count() {
        return Err(SearchError::PeerCountMismatch {
            expected: pg.peer_count(),
            found: ranking.peer_count(),
        });
    }
    let adj = pg.adjacency();
    let n = pg.peer_count();
    let mut chosen = Vec::with_capacity(n);
    let mut union: Vec<Vec<u32>> = vec![Vec::new(); n];
    for p in 0..n {
        let ns = adj.neighbors(p);
        if ns.is_empty() {
            chosen.push(Vec::new());
            continue;
        }
        let k = t.fan_out(ns.len());
        let picked: Vec<u32> = if t.kind == TechniqueKind::Random {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, p as u64));
            let mut order = ns.to_vec();
            order.shuffle(&mut rng);
            order.truncate(k);
            order
        } else {
            let mut scored: Vec<(u32, f64)> = adj
                .slots(p)
                .map(|slot| {
                    let q = adj.targets[slot];
                    let s = match t.kind {
                        TechniqueKind::PeerDegree => ranking.degree[q as usize],
                        TechniqueKind::PeerBetweenness => {
                            ranking.betweenness.as_ref().expect("checked")[q as usize]
                        }
                        _ => ranking.edge_slots.as_ref().expect("checked")[slot],
                    };
                    (q, s)
                })
                .collect();
            rank_by_score(&mut scored);
            scored.into_iter().take(k).map(|(q, _)| q).collect()
        };
        for &q in &picked {
            union[p].push(q);
            union[q as usize].push(p as u32);
        }
        chosen.push(picked);
    }
    for list in &mut union {
        list.sort_unstable();
        list.dedup();
    }
    Ok(ActiveConnectionSet { chosen, union })
}

/// One query's result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub success: bool,
    /// Frontier depth at success, or the depth reached when the flood died.
    pub hops: usize,
    /// Distinct peers touched, ascending. Always holds the source peer.
    pub peers_accessed: Vec<PeerId>,
    /// Forwards sent, counting deliveries to already visited nodes.
    pub messages: u64,
}

/// Goal bookkeeping shared by both layers.
struct Goal {
    workload: Workload,
    dest: Option<UserId>,
    dest_peer: Option<PeerId>,
    found_users: usize,
    peer_seen: Vec<bool>,
    found_peers: usize,
    met: bool,
}

impl Goal {
    fn new(workload: Workload, dest: Option<UserId>, m: &Mapping) -> Self {
        Goal {
            workload,
            dest,
            dest_peer: dest.map(|d| m.peer_of(d)),
            found_users: 0,
            peer_seen: vec![false; m.peer_count()],
            found_peers: 0,
            met: false,
        }
    }

    /// Records `count` newly visible users on `peer`; `user` is set when a
    /// single user is seen.
    fn see(&mut self, peer: PeerId, count: usize, user: Option<UserId>) {
        if count == 0 {
            return;
        }
        match self.workload {
            Workload::PersonFinder => {
                if user.is_some() && user == self.dest
                    || user.is_none() && Some(peer) == self.dest_peer
                {
                    self.met = true;
                }
            }
            Workload::TeamBuilder { d } => {
                self.found_users += count;
                if !self.peer_seen[peer] {
                    self.peer_seen[peer] = true;
                    self.found_peers += 1;
                }
                if self.found_users >= d
                    && self.found_peers >= self.workload.required_communities()
                {
                    self.met = true;
                }
            }
        }
    }
}

fn check_endpoints(
    users: usize,
    w: Workload,
    source: UserId,
    dest: Option<UserId>,
) -> Result<(), SearchError> {
    if source >= users {
        return Err(SearchError::UnknownUser(source));
    }
    match (w, dest) {
        (Workload::PersonFinder, Some(d)) if d >= users => Err(SearchError::UnknownUser(d)),
        (Workload::PersonFinder, Some(d)) if d == source => Err(SearchError::SameEndpoints(d)),
        (Workload::PersonFinder, Some(_)) | (Workload::TeamBuilder { .. }, None) => Ok(()),
        _ => Err(SearchError::DestinationMismatch),
    }
}

/// How a user picks the neighbours it forwards to at the social layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Forwarding {
    /// Neighbours the query already reached are skipped before ranking, so
    /// forwards are never wasted and fan-out stays at least one while any
    /// neighbour is unreached. At `n_percent = 100` this is a plain flood.
    #[default]
    SkipVisited,
    /// Selection depends only on the user, never on the query's progress,
    /// so a larger `n_percent` floods a superset of links and success can
    /// never drop. Ranking techniques then keep sending into the same
    /// high-scoring peers, which stalls floods early.
    Fixed,
}

impl Forwarding {
    pub fn as_str(self) -> &'static str {
        match self {
            Forwarding::SkipVisited => "skip_visited",
            Forwarding::Fixed => "fixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "skip_visited" => Some(Forwarding::SkipVisited),
            "fixed" => Some(Forwarding::Fixed),
            _ => None,
        }
    }
}

/// Neighbours of `x` that receive its forwards.
///
/// Candidates are all neighbours, or the unreached ones under
/// [`Forwarding::SkipVisited`]. Ranking techniques keep the top `n_percent`
/// of the distinct peers hosting the candidates and forward to every candidate on them. Under the
/// edge technique `x`'s own peer ranks first (it has no peer edge to itself).
/// The random technique forwards to as many candidates as the degree
/// technique would, taken in the order of a per-user shuffle.
#[allow(clippy::too_many_arguments)]
fn sg_targets(
    g: &SocialGraph,
    m: &Mapping,
    pg: &ProjectionGraph,
    ranking: &PeerRanking,
    t: Technique,
    forwarding: Forwarding,
    visited: &[bool],
    x: UserId,
    query_seed: u64,
) -> Vec<u32> {
    let ns = g.neighbors(x);
    let candidates: Vec<u32> = match forwarding {
        Forwarding::Fixed => ns.to_vec(),
        Forwarding::SkipVisited => ns.iter().copied().filter(|&y| !visited[y as usize]).collect(),
    };
    if candidates.is_empty() {
        return Vec::new();
    }
    let own = m.peer_of(x);
    let kind = match t.kind {
        TechniqueKind::Random => TechniqueKind::PeerDegree,
        k => k,
    };
    let mut peers: Vec<u32> = candidates.iter().map(|&y| m.peer_of(y as usize) as u32).collect();
    peers.sort_unstable();
    peers.dedup();
    let k = t.fan_out(peers.len());
    let adj = pg.adjacency();
    let mut scored: Vec<(u32, f64)> = peers
        .into_iter()
        .map(|p| {
            let s = match kind {
                TechniqueKind::PeerDegree => ranking.degree[p as usize],
                TechniqueKind::PeerBetweenness => {
                    ranking.betweenness.as_ref().expect("checked")[p as usize]
                }
                _ if p as usize == own => f64::INFINITY,
                _ => {
                    let slot = adj.slot_of(own, p as usize).expect("neighbouring peers share an edge");
                    ranking.edge_slots.as_ref().expect("checked")[slot]
                }
            };
            (p, s)
        })
        .collect();
    rank_by_score(&mut scored);
    let mut keep: Vec<u32> = scored.into_iter().take(k).map(|(p, _)| p).collect();
    keep.sort_unstable();
    let selected: Vec<u32> = candidates
        .iter()
        .copied()
        .filter(|&y| keep.binary_search(&(m.peer_of(y as usize) as u32)).is_ok())
        .collect();
    if t.kind != TechniqueKind::Random {
        return selected;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(query_seed, x as u64));
    let mut order = ns.to_vec();
    order.shuffle(&mut rng);
    if forwarding != Forwarding::Fixed {
        let mut sorted = candidates;
        sorted.sort_unstable();
        order.retain(|y| sorted.binary_search(y).is_ok());
    }
    order.truncate(selected.len());
    order
}

/// Floods a query over social edges from `source`.
#[allow(clippy::too_many_arguments)]
pub fn run_query_sg(
    g: &SocialGraph,
    m: &Mapping,
    pg: &ProjectionGraph,
    ranking: &PeerRanking,
    t: Technique,
    forwarding: Forwarding,
    w: Workload,
    source: UserId,
    dest: Option<UserId>,
    seed: u64,
) -> Result<SearchOutcome, SearchError> {
    m.check_covers(g)?;
    ranking.require(t.kind)?;
    if pg.peer_count() != m.peer_count() || ranking.peer_count() != m.peer_count() {
        return Err(SearchError::PeerCountMismatch {
            expected: m.peer_count(),
            found: pg.peer_count().min(ranking.peer_count()),
        });
    }
    check_endpoints(g.node_count(), w, source, dest)?;

    let mut goal = Goal::new(w, dest, m);
    let mut visited = vec![false; g.node_count()];
    let mut touched = vec![false; m.peer_count()];
    visited[source] = true;
    touched[m.peer_of(source)] = true;
    let mut frontier = vec![source as u32];
    let mut depth = 0;
    let mut messages = 0u64;
    while !goal.met && !frontier.is_empty() {
        let mut next = Vec::new();
        for &x in &frontier {
            let targets = sg_targets(g, m, pg, ranking, t, forwarding, &visited, x as usize, seed);
            messages += targets.len() as u64;
            for y in targets {
                let yu = y as usize;
                if !visited[yu] {
                    visited[yu] = true;
                    let p = m.peer_of(yu);
                    touched[p] = true;
                    goal.see(p, 1, Some(yu));
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        frontier = next;
    }
    Ok(SearchOutcome {
        success: goal.met,
        hops: depth,
        peers_accessed: peer_list(&touched),
        messages,
    })
}

/// Floods a query over active peer edges from the peer hosting `source`.
/// Reaching a peer exposes every user on it; the source user itself never
/// counts toward a team.
pub fn run_query_pg(
    pg: &ProjectionGraph,
    m: &Mapping,
    ea: &ActiveConnectionSet,
    w: Workload,
    source: UserId,
    dest: Option<UserId>,
) -> Result<SearchOutcome, SearchError> {
    if pg.peer_count() != m.peer_count() || ea.peer_count() != m.peer_count() {
        return Err(SearchError::PeerCountMismatch {
            expected: m.peer_count(),
            found: pg.peer_count().min(ea.peer_count()),
        });
    }
    check_endpoints(m.user_count(), w, source, dest)?;

    let sizes = m.sizes();
    let mut goal = Goal::new(w, dest, m);
    let mut visited = vec![false; m.peer_count()];
    let start = m.peer_of(source);
    visited[start] = true;
    goal.see(start, sizes[start] - 1, None);
    if matches!(w, Workload::PersonFinder) && goal.dest_peer == Some(start) {
        goal.met = true;
    }
    let mut frontier = vec![start as u32];
    let mut depth = 0;
    let mut messages = 0u64;
    while !goal.met && !frontier.is_empty() {
        let mut next = Vec::new();
        for &p in &frontier {
            let ns = ea.neighbors(p as usize);
            messages += ns.len() as u64;
            for &q in ns {
                let qu = q as usize;
                if !visited[qu] {
                    visited[qu] = true;
                    goal.see(qu, sizes[qu], None);
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        frontier = next;
    }
    Ok(SearchOutcome {
        success: goal.met,
        hops: depth,
        peers_accessed: peer_list(&visited),
        messages,
    })
}

fn peer_list(flags: &[bool]) -> Vec<PeerId> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(p, &on)| on.then_some(p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkloadKind {
    PersonFinder,
    TeamBuilder,
}

impl WorkloadKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadKind::PersonFinder => "person_finder",
            WorkloadKind::TeamBuilder => "team_builder",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "person_finder" => Some(WorkloadKind::PersonFinder),
            "team_builder" => Some(WorkloadKind::TeamBuilder),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub workload: WorkloadKind,
    pub techniques: Vec<TechniqueKind>,
    pub n_percents: Vec<u32>,
    pub layers: Vec<Layer>,
    /// Queries as a fraction of the users.
    pub s_fraction: f64,
    /// Team size as a fraction of the users.
    pub d_fraction: f64,
    /// Length function for the peer betweenness rankings.
    pub distance: DistanceMode,
    pub forwarding: Forwarding,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            workload: WorkloadKind::PersonFinder,
            techniques: TechniqueKind::ALL.to_vec(),
            n_percents: vec![20],
            layers: vec![Layer::Social, Layer::Projection],
            s_fraction: 0.10,
            d_fraction: 0.01,
            distance: DistanceMode::InverseWeight,
            forwarding: Forwarding::default(),
            seed: 0,
            exec: Execution::Parallel,
        }
    }
}

/// Endpoints of one sampled query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Query {
    pub id: usize,
    pub source: UserId,
    pub dest: Option<UserId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeRow {
    pub query_id: usize,
    pub technique: TechniqueKind,
    pub layer: Layer,
    pub n_percent: u32,
    pub outcome: SearchOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub technique: TechniqueKind,
    pub layer: Layer,
    pub n_percent: u32,
    pub queries: usize,
    pub success_rate: f64,
    /// Hop percentiles over successful queries; `None` without successes.
    pub hops_p50: Option<usize>,
    pub hops_p90: Option<usize>,
    pub mean_peer_fraction: f64,
    pub mean_messages: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub workload: Workload,
    pub peer_count: usize,
    pub queries: Vec<Query>,
    pub rows: Vec<OutcomeRow>,
    pub summaries: Vec<Summary>,
}

impl ExperimentReport {
    pub fn summary(&self, technique: TechniqueKind, layer: Layer, n_percent: u32) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.technique == technique && s.layer == layer && s.n_percent == n_percent)
    }

    /// `query_id,workload,technique,layer,n_percent,success,hops,peers_accessed,peer_fraction,messages`
    pub fn write_outcomes_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "query_id",
            "workload",
            "technique",
            "layer",
            "n_percent",
            "success",
            "hops",
            "peers_accessed",
            "peer_fraction",
            "messages",
        ])?;
        for r in &self.rows {
            let accessed = r.outcome.peers_accessed.len();
            w.write_record([
                r.query_id.to_string(),
                self.workload.as_str().to_string(),
                r.technique.to_string(),
                r.layer.as_str().to_string(),
                r.n_percent.to_string(),
                r.outcome.success.to_string(),
                r.outcome.hops.to_string(),
                accessed.to_string(),
                (accessed as f64 / self.peer_count as f64).to_string(),
                r.outcome.messages.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per `(technique, layer, n_percent)`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "workload",
            "technique",
            "layer",
            "n_percent",
            "queries",
            "success_rate",
            "hops_p50",
            "hops_p90",
            "mean_peer_fraction",
            "mean_messages",
        ])?;
        let opt = |h: Option<usize>| h.map_or(String::new(), |h| h.to_string());
        for s in &self.summaries {
            w.write_record([
                self.workload.as_str().to_string(),
                s.technique.to_string(),
                s.layer.as_str().to_string(),
                s.n_percent.to_string(),
                s.queries.to_string(),
                s.success_rate.to_string(),
                opt(s.hops_p50),
                opt(s.hops_p90),
                s.mean_peer_fraction.to_string(),
                s.mean_messages.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[usize], q: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Samples `floor(s_fraction * n)` distinct sources and, for the
/// person-finder, one uniform destination per source.
pub fn sample_queries(
    users: usize,
    workload: WorkloadKind,
    s_fraction: f64,
    seed: u64,
) -> Result<Vec<Query>, SearchError> {
    if !(s_fraction > 0.0 && s_fraction <= 1.0) {
        return Err(SearchError::BadFraction("s_fraction", s_fraction));
    }
    if users < 2 {
        return Err(SearchError::TooFewUsers);
    }
    let count = (s_fraction * users as f64).floor() as usize;
    if count == 0 {
        return Err(SearchError::NoQueries(s_fraction, users));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = index::sample(&mut rng, users, count).into_vec();
    Ok(sources
        .into_iter()
        .enumerate()
        .map(|(id, source)| {
            let dest = match workload {
                WorkloadKind::PersonFinder => {
                    let d = rng.gen_range(0..users - 1);
                    Some(if d >= source { d + 1 } else { d })
                }
                WorkloadKind::TeamBuilder => None,
            };
            Query { id, source, dest }
        })
        .collect())
}

/// Team size `max(1, round(d_fraction * n))`.
pub fn team_size(users: usize, d_fraction: f64) -> Result<usize, SearchError> {
    if !(d_fraction > 0.0 && d_fraction <= 1.0) {
        return Err(SearchError::BadFraction("d_fraction", d_fraction));
    }
    Ok(((d_fraction * users as f64).round() as usize).max(1))
}

/// Runs every technique, layer and `n_percent` of `config` on one shared
/// sample of query endpoints.
pub fn run_experiment(
    g: &SocialGraph,
    m: &Mapping,
    pg: &ProjectionGraph,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, SearchError> {
    m.check_covers(g)?;
    let techniques: Vec<Technique> = config
        .techniques
        .iter()
        .flat_map(|&k| config.n_percents.iter().map(move |&n| Technique::new(k, n)))
        .collect::<Result<_, _>>()?;
    let workload = match config.workload {
        WorkloadKind::PersonFinder => Workload::PersonFinder,
        WorkloadKind::TeamBuilder => Workload::team(team_size(g.node_count(), config.d_fraction)?)?,
    };
    let queries = sample_queries(g.node_count(), config.workload, config.s_fraction, config.seed)?;
    let ranking = PeerRanking::compute(pg, &config.techniques, config.distance, config.exec)?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &layer in &config.layers {
        for (ti, &t) in techniques.iter().enumerate() {
            let results = match layer {
                Layer::Social => par::map_indexed(config.exec, queries.len(), |i| {
                    let q = queries[i];
                    let seed = derive_seed(config.seed, q.id as u64);
                    run_query_sg(g, m, pg, &ranking, t, config.forwarding, workload, q.source, q.dest, seed)
                }),
                Layer::Projection => {
                    let seed = derive_seed(config.seed ^ 0x5045_4552, ti as u64);
                    let ea = build_active_sets(pg, &ranking, t, seed)?;
                    par::map_indexed(config.exec, queries.len(), |i| {
                        run_query_pg(pg, m, &ea, workload, queries[i].source, queries[i].dest)
                    })
                }
            };
            let outcomes: Vec<SearchOutcome> = results.into_iter().collect::<Result<_, _>>()?;
            summaries.push(summarize(t, layer, &outcomes, m.peer_count()));
            rows.extend(outcomes.into_iter().zip(&queries).map(|(outcome, q)| OutcomeRow {
                query_id: q.id,
                technique: t.kind,
                layer,
                n_percent: t.n_percent,
                outcome,
            }));
        }
    }
    Ok(ExperimentReport {
        workload,
        peer_count: m.peer_count(),
        queries,
        rows,
        summaries,
    })
}

fn summarize(t: Technique, layer: Layer, outcomes: &[SearchOutcome], peers: usize) -> Summary {
    let total = outcomes.len().max(1) as f64;
    let mut hops: Vec<usize> = outcomes.iter().filter(|o| o.success).map(|o| o.hops).collect();
    hops.sort_unstable();
    Summary {
        technique: t.kind,
        layer,
        n_percent: t.n_percent,
        queries: outcomes.len(),
        success_rate: hops.len() as f64 / total,
        hops_p50: percentile(&hops, 0.5),
        hops_p90: percentile(&hops, 0.9),
        mean_peer_fraction: outcomes
            .iter()
            .map(|o| o.peers_accessed.len() as f64 / peers as f64)
            .sum::<f64>()
            / total,
        mean_messages: outcomes.iter().map(|o| o.messages as f64).sum::<f64>() / total,
    }
}
