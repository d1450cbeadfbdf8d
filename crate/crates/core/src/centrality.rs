//! Degree, node-betweenness and edge-betweenness centrality on social and
//! projection graphs, cumulative peer estimates, and the per-category
//! breakdown of user and social-edge betweenness under a mapping.
//!
//! Betweenness sums over unordered source/target pairs. Nodes exclude pairs
//! they are an endpoint of; edges include the pair of their own endpoints.
//! Projection graphs can measure path length in hops or as the sum of
//! `1 / w` over the peer edges used.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::community::Mapping;
use crate::graph::{AdjacencyView, EdgeKey, Layer, SocialGraph, Topology, UserId};
use crate::par::{self, Execution};
use crate::projection::ProjectionGraph;

/// Relative tolerance under which two weighted path lengths are equal.
pub const PATH_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CentralityError {
    #[error("normalization needs at least {needed} nodes, graph has {found}")]
    TooFewNodes { needed: usize, found: usize },
    #[error("expected a {expected} vector, got {found}")]
    ScopeMismatch { expected: &'static str, found: Scope },
    #[error("mapping covers {found} users but the graph has {expected}")]
    MappingSize { expected: usize, found: usize },
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("{0} is not an edge of the graph")]
    UnknownEdge(EdgeKey),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Degree,
    NodeBetweenness,
    EdgeBetweenness,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Degree => "degree",
            Metric::NodeBetweenness => "node_betweenness",
            Metric::EdgeBetweenness => "edge_betweenness",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    User,
    Peer,
    SgEdge,
    PgEdge,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::User => "user",
            Scope::Peer => "peer",
            Scope::SgEdge => "sg_edge",
            Scope::PgEdge => "pg_edge",
        }
    }

    fn nodes_of(layer: Layer) -> Self {
        match layer {
            Layer::Social => Scope::User,
            Layer::Projection => Scope::Peer,
        }
    }

    fn edges_of(layer: Layer) -> Self {
        match layer {
            Layer::Social => Scope::SgEdge,
            Layer::Projection => Scope::PgEdge,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Length function for shortest paths. Social graphs are always `Unit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    Unit,
    #[default]
    InverseWeight,
}

impl DistanceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMode::Unit => "unit",
            DistanceMode::InverseWeight => "inverse_weight",
        }
    }
}

impl fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Scores of one metric over the nodes or edges of one graph. For edge
/// scopes `edges[i]` is the edge scored by `scores[i]`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub metric: Metric,
    pub scope: Scope,
    pub distance: DistanceMode,
    pub normalized: bool,
    /// Set when normalization was requested on a graph too small for it; all
    /// scores are then zero.
    pub degenerate: bool,
    pub scores: Vec<f64>,
    pub edges: Vec<EdgeKey>,
}

impl CentralityVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Score of `edge`, for edge scopes.
    pub fn edge_score(&self, edge: EdgeKey) -> Option<f64> {
        self.edges
            .binary_search(&edge)
            .ok()
            .map(|i| self.scores[i])
    }

    pub fn mean(&self) -> f64 {
        if self.scores.is_empty() {
            0.0
        } else {
            self.scores.iter().sum::<f64>() / self.scores.len() as f64
        }
    }

    /// Indices ordered by score descending, then index ascending.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.scores.len()).collect();
        idx.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        idx
    }

    /// Writes `id,score` (nodes) or `u,v,score` (edges) under a comment line
    /// naming metric, scope, normalization and distance mode. `label` turns
    /// internal ids into the ids printed.
    pub fn write_csv<W: Write>(&self, mut out: W, label: &dyn Fn(usize) -> u64) -> io::Result<()> {
        writeln!(
            out,
            "# metric={} scope={} normalized={} distance_mode={}",
            self.metric, self.scope, self.normalized, self.distance
        )?;
        self.write_rows(out, label)
    }

    /// [`CentralityVector::write_csv`] without the comment line.
    pub fn write_rows<W: Write>(&self, mut out: W, label: &dyn Fn(usize) -> u64) -> io::Result<()> {
        if matches!(self.scope, Scope::User | Scope::Peer) {
            writeln!(out, "id,score")?;
            for (i, s) in self.scores.iter().enumerate() {
                writeln!(out, "{},{}", label(i), s)?;
            }
        } else {
            writeln!(out, "u,v,score")?;
            for (e, s) in self.edges.iter().zip(&self.scores) {
                writeln!(out, "{},{},{}", label(e.low()), label(e.high()), s)?;
            }
        }
        Ok(())
    }
}

/// Number of distinct neighbours. On a projection graph each weighted bundle
/// counts once.
pub fn degree_centrality<G: Topology + ?Sized>(g: &G, normalize: bool) -> CentralityVector {
    let adj = g.adjacency();
    let n = adj.node_count();
    let degenerate = normalize && n < 2;
    let scores = (0..n)
        .map(|u| {
            let d = adj.neighbors(u).len() as f64;
            match (normalize, degenerate) {
                (true, true) => 0.0,
                (true, false) => d / (n - 1) as f64,
                _ => d,
            }
        })
        .collect();
    CentralityVector {
        metric: Metric::Degree,
        scope: Scope::nodes_of(g.layer()),
        distance: DistanceMode::Unit,
        normalized: normalize,
        degenerate,
        scores,
        edges: Vec::new(),
    }
}

/// Edge keys in ascending order plus, for every adjacency slot, the index of
/// the edge it belongs to.
pub(crate) fn edge_index(adj: &AdjacencyView<'_>) -> (Vec<EdgeKey>, Vec<u32>) {
    let n = adj.node_count();
    let mut keys = Vec::with_capacity(adj.edge_count());
    let mut slot_edge = vec![u32::MAX; adj.targets.len()];
    for u in 0..n {
        for slot in adj.slots(u) {
            let v = adj.targets[slot] as usize;
            if v > u {
                let e = keys.len() as u32;
                keys.push(EdgeKey::new(u, v).expect("no self-loops"));
                slot_edge[slot] = e;
                let back = adj.slot_of(v, u).expect("symmetric adjacency");
                slot_edge[back] = e;
            }
        }
    }
    (keys, slot_edge)
}

fn effective_mode<G: Topology + ?Sized>(g: &G, mode: DistanceMode) -> DistanceMode {
    match g.layer() {
        Layer::Social => DistanceMode::Unit,
        Layer::Projection => mode,
    }
}

#[derive(PartialEq)]
struct HeapEntry(f64, usize);

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Scratch space for one single-source shortest-path pass.
struct PathCounts {
    sigma: Vec<f64>,
    dist: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    /// `(predecessor, slot)` pairs per node.
    preds: Vec<Vec<(u32, u32)>>,
    settled: Vec<bool>,
    heap: BinaryHeap<HeapEntry>,
    queue: VecDeque<usize>,
}

impl PathCounts {
    fn new(n: usize) -> Self {
        PathCounts {
            sigma: vec![0.0; n],
            dist: vec![f64::INFINITY; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            preds: vec![Vec::new(); n],
            settled: vec![false; n],
            heap: BinaryHeap::new(),
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.order {
            self.sigma[v] = 0.0;
            self.dist[v] = f64::INFINITY;
            self.delta[v] = 0.0;
            self.preds[v].clear();
            self.settled[v] = false;
        }
        self.order.clear();
    }

    fn run(&mut self, adj: &AdjacencyView<'_>, source: usize, mode: DistanceMode) {
        self.reset();
        self.sigma[source] = 1.0;
        self.dist[source] = 0.0;
        match mode {
            DistanceMode::Unit => self.bfs(adj, source),
            DistanceMode::InverseWeight => self.dijkstra(adj, source),
        }
    }

    fn bfs(&mut self, adj: &AdjacencyView<'_>, source: usize) {
        self.queue.push_back(source);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            let next = self.dist[v] + 1.0;
            for slot in adj.slots(v) {
                let w = adj.targets[slot] as usize;
                if self.dist[w].is_infinite() {
                    self.dist[w] = next;
                    self.queue.push_back(w);
                }
                if self.dist[w] == next {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push((v as u32, slot as u32));
                }
            }
        }
    }

    fn dijkstra(&mut self, adj: &AdjacencyView<'_>, source: usize) {
        self.heap.push(HeapEntry(0.0, source));
        while let Some(HeapEntry(d, v)) = self.heap.pop() {
            if self.settled[v] || d > self.dist[v] {
                continue;
            }
            self.settled[v] = true;
            self.order.push(v);
            for slot in adj.slots(v) {
                let w = adj.targets[slot] as usize;
                if self.settled[w] {
                    continue;
                }
                let candidate = d + 1.0 / adj.weight_at(slot) as f64;
                let current = self.dist[w];
                if current.is_infinite() || candidate < current * (1.0 - PATH_TIE_TOLERANCE) {
                    self.dist[w] = candidate;
                    self.sigma[w] = self.sigma[v];
                    self.preds[w].clear();
                    self.preds[w].push((v as u32, slot as u32));
                    self.heap.push(HeapEntry(candidate, w));
                } else if (candidate - current).abs() <= PATH_TIE_TOLERANCE * current {
                    self.sigma[w] += self.sigma[v];
                    self.preds[w].push((v as u32, slot as u32));
                }
            }
        }
    }

    /// Back-propagates dependencies of the last source, adding node
    /// dependencies and edge flows into the accumulators.
    fn accumulate(
        &mut self,
        source: usize,
        slot_edge: &[u32],
        nodes: Option<&mut [f64]>,
        mut edges: Option<&mut [f64]>,
    ) {
        for &w in self.order.iter().rev() {
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &(v, slot) in &self.preds[w] {
                let flow = self.sigma[v as usize] * coeff;
                self.delta[v as usize] += flow;
                if let Some(acc) = edges.as_deref_mut() {
                    acc[slot_edge[slot as usize] as usize] += flow;
                }
            }
        }
        if let Some(acc) = nodes {
            for &w in &self.order {
                if w != source {
                    acc[w] += self.delta[w];
                }
            }
        }
    }
}

/// Raw unordered-pair betweenness of nodes and/or edges.
fn brandes(
    adj: &AdjacencyView<'_>,
    mode: DistanceMode,
    want_nodes: bool,
    want_edges: bool,
    exec: Execution,
) -> (Vec<f64>, Vec<f64>, Vec<EdgeKey>) {
    let n = adj.node_count();
    let (keys, slot_edge) = edge_index(adj);
    let m = keys.len();
    let partials = par::map_chunks(exec, n, par::MAX_CHUNKS, |sources| {
        let mut counts = PathCounts::new(n);
        let mut nodes = if want_nodes { vec![0.0; n] } else { Vec::new() };
        let mut edges = if want_edges { vec![0.0; m] } else { Vec::new() };
        for s in sources {
            counts.run(adj, s, mode);
            counts.accumulate(
                s,
                &slot_edge,
                want_nodes.then_some(nodes.as_mut_slice()),
                want_edges.then_some(edges.as_mut_slice()),
            );
        }
        (nodes, edges)
    });
    let mut nodes = if want_nodes { vec![0.0; n] } else { Vec::new() };
    let mut edges = if want_edges { vec![0.0; m] } else { Vec::new() };
    for (pn, pe) in partials {
        for (a, b) in nodes.iter_mut().zip(pn) {
            *a += b;
        }
        for (a, b) in edges.iter_mut().zip(pe) {
            *a += b;
        }
    }
    // every unordered pair was counted from both ends
    for x in nodes.iter_mut().chain(edges.iter_mut()) {
        *x /= 2.0;
    }
    (nodes, edges, keys)
}

/// Brandes node betweenness. Normalized scores are multiplied by
/// `2 / ((n-1)(n-2))`.
pub fn node_betweenness<G: Topology + ?Sized>(
    g: &G,
    mode: DistanceMode,
    normalize: bool,
    exec: Execution,
) -> Result<CentralityVector, CentralityError> {
    let adj = g.adjacency();
    let n = adj.node_count();
    if normalize && n < 3 {
        return Err(CentralityError::TooFewNodes {
            needed: 3,
            found: n,
        });
    }
    let mode = effective_mode(g, mode);
    let (mut scores, _, _) = brandes(&adj, mode, true, false, exec);
    if normalize {
        let f = 2.0 / ((n - 1) as f64 * (n - 2) as f64);
        scores.iter_mut().for_each(|s| *s *= f);
    }
    Ok(CentralityVector {
        metric: Metric::NodeBetweenness,
        scope: Scope::nodes_of(g.layer()),
        distance: mode,
        normalized: normalize,
        degenerate: false,
        scores,
        edges: Vec::new(),
    })
}

/// Brandes edge betweenness. Normalized scores are multiplied by
/// `2 / (n(n-1))`.
pub fn edge_betweenness<G: Topology + ?Sized>(
    g: &G,
    mode: DistanceMode,
    normalize: bool,
    exec: Execution,
) -> Result<CentralityVector, CentralityError> {
    let adj = g.adjacency();
    let n = adj.node_count();
    if normalize && n < 2 {
        return Err(CentralityError::TooFewNodes {
            needed: 2,
            found: n,
        });
    }
    let mode = effective_mode(g, mode);
    let (_, mut scores, edges) = brandes(&adj, mode, false, true, exec);
    if normalize {
        let f = 2.0 / (n as f64 * (n - 1) as f64);
        scores.iter_mut().for_each(|s| *s *= f);
    }
    Ok(CentralityVector {
        metric: Metric::EdgeBetweenness,
        scope: Scope::edges_of(g.layer()),
        distance: mode,
        normalized: normalize,
        degenerate: false,
        scores,
        edges,
    })
}

/// Sums user scores per peer, or social-edge scores per peer edge (edges
/// inside a peer are dropped).
pub fn cumulative_estimate(
    cv: &CentralityVector,
    m: &Mapping,
    pg: &ProjectionGraph,
) -> Result<CentralityVector, CentralityError> {
    let (scope, scores, edges) = match cv.scope {
        Scope::User => {
            if cv.len() != m.user_count() {
                return Err(CentralityError::MappingSize {
                    expected: cv.len(),
                    found: m.user_count(),
                });
            }
            let mut sums = vec![0.0; m.peer_count()];
            for (u, s) in cv.scores.iter().enumerate() {
                sums[m.peer_of(u)] += s;
            }
            (Scope::Peer, sums, Vec::new())
        }
        Scope::SgEdge => {
            let (keys, _) = edge_index(&pg.adjacency());
            let mut sums = vec![0.0; keys.len()];
            for (e, s) in cv.edges.iter().zip(&cv.scores) {
                if e.high() >= m.user_count() {
                    return Err(CentralityError::UnknownNode(e.high()));
                }
                let (a, b) = (m.peer_of(e.low()), m.peer_of(e.high()));
                if a != b {
                    let key = EdgeKey::new(a, b).expect("distinct peers");
                    let i = keys
                        .binary_search(&key)
                        .map_err(|_| CentralityError::UnknownEdge(key))?;
                    sums[i] += s;
                }
            }
            (Scope::PgEdge, sums, keys)
        }
        found => {
            return Err(CentralityError::ScopeMismatch {
                expected: "user or sg_edge",
                found,
            })
        }
    };
    Ok(CentralityVector {
        metric: cv.metric,
        scope,
        distance: cv.distance,
        normalized: cv.normalized,
        degenerate: cv.degenerate,
        scores,
        edges,
    })
}

/// Where the endpoints of a shortest path lie relative to the peer of the
/// user it passes through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodePathCategory {
    /// `s`, `t` and `u` on three different peers, or `s` and `t` on two
    /// different peers other than `u`'s.
    Scattered = 0,
    /// Exactly one of `s`, `t` shares `u`'s peer.
    OneEndpointHome = 1,
    /// `s` and `t` share a peer that is not `u`'s.
    EndpointsTogetherAway = 2,
    /// All three on one peer.
    AllHome = 3,
}

/// Contribution of each [`NodePathCategory`] to one user's betweenness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeDecomposition {
    pub categories: [f64; 4],
    /// Betweenness of the user computed independently by Brandes.
    pub total: f64,
}

impl NodeDecomposition {
    pub fn category(&self, c: NodePathCategory) -> f64 {
        self.categories[c as usize]
    }

    pub fn residual(&self) -> f64 {
        (self.categories.iter().sum::<f64>() - self.total).abs()
    }
}

/// Placement of a shortest path's endpoints relative to the social edge it
/// uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgePathCategory {
    /// Edge crosses peers; `s` and `t` on different peers.
    CrossEdgeApartEnds = 0,
    /// Edge inside one peer that also holds `s` and `t`.
    InnerEdgeAllHome = 1,
    /// Edge inside one peer holding exactly one of `s`, `t`.
    InnerEdgeOneEndHome = 2,
    /// Edge crosses peers; `s` and `t` on the same peer.
    CrossEdgeEndsTogether = 3,
    /// Edge inside a peer holding neither `s` nor `t`.
    InnerEdgeEndsAway = 4,
}

/// Contribution of each [`EdgePathCategory`] to one edge's betweenness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDecomposition {
    pub categories: [f64; 5],
    pub total: f64,
}

impl EdgeDecomposition {
    pub fn category(&self, c: EdgePathCategory) -> f64 {
        self.categories[c as usize]
    }

    pub fn residual(&self) -> f64 {
        (self.categories.iter().sum::<f64>() - self.total).abs()
    }
}

struct SourcePaths {
    dist: Vec<Option<usize>>,
    sigma: Vec<f64>,
}

fn bfs_paths(g: &SocialGraph, source: usize) -> SourcePaths {
    let n = g.node_count();
    let mut dist = vec![None; n];
    let mut sigma = vec![0.0; n];
    dist[source] = Some(0);
    sigma[source] = 1.0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].expect("queued nodes have distances");
        for &w in g.neighbors(v) {
            let w = w as usize;
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
            if dist[w] == Some(dv + 1) {
                sigma[w] += sigma[v];
            }
        }
    }
    SourcePaths { dist, sigma }
}

fn check_mapping(g: &SocialGraph, m: &Mapping) -> Result<(), CentralityError> {
    if m.user_count() != g.node_count() {
        return Err(CentralityError::MappingSize {
            expected: g.node_count(),
            found: m.user_count(),
        });
    }
    Ok(())
}

/// Splits the betweenness of user `u` by where each pair's endpoints are
/// mapped, using pair dependencies `sigma(s,u) sigma(u,t) / sigma(s,t)`.
pub fn betweenness_decomposition_check(
    g: &SocialGraph,
    m: &Mapping,
    u: UserId,
) -> Result<NodeDecomposition, CentralityError> {
    check_mapping(g, m)?;
    let n = g.node_count();
    if u >= n {
        return Err(CentralityError::UnknownNode(u));
    }
    let home = m.peer_of(u);
    let from_u = bfs_paths(g, u);
    let mut categories = [0.0; 4];
    for s in (0..n).filter(|&s| s != u) {
        let from_s = bfs_paths(g, s);
        let (Some(su), true) = (from_s.dist[u], from_s.sigma[u] > 0.0) else {
            continue;
        };
        for t in (s + 1..n).filter(|&t| t != u) {
            let (Some(st), Some(ut)) = (from_s.dist[t], from_u.dist[t]) else {
                continue;
            };
            if su + ut != st {
                continue;
            }
            let share = from_s.sigma[u] * from_u.sigma[t] / from_s.sigma[t];
            let (ps, pt) = (m.peer_of(s), m.peer_of(t));
            let cat = match (ps == home, pt == home) {
                (true, true) => NodePathCategory::AllHome,
                (true, false) | (false, true) => NodePathCategory::OneEndpointHome,
                (false, false) if ps == pt => NodePathCategory::EndpointsTogetherAway,
                (false, false) => NodePathCategory::Scattered,
            };
            categories[cat as usize] += share;
        }
    }
    let total = node_betweenness(g, DistanceMode::Unit, false, Execution::Sequential)?.scores[u];
    Ok(NodeDecomposition { categories, total })
}

/// Splits the betweenness of social edge `e` by where each pair's endpoints
/// and the edge itself are mapped.
pub fn edge_decomposition_check(
    g: &SocialGraph,
    m: &Mapping,
    e: EdgeKey,
) -> Result<EdgeDecomposition, CentralityError> {
    check_mapping(g, m)?;
    let n = g.node_count();
    let (a, b) = (e.low(), e.high());
    if b >= n || !g.has_edge(a, b) {
        return Err(CentralityError::UnknownEdge(e));
    }
    let (pa, pb) = (m.peer_of(a), m.peer_of(b));
    let from_a = bfs_paths(g, a);
    let from_b = bfs_paths(g, b);
    let mut categories = [0.0; 5];
    for s in 0..n {
        let from_s = bfs_paths(g, s);
        for t in s + 1..n {
            let Some(st) = from_s.dist[t] else { continue };
            let mut through = 0.0;
            // s .. a - b .. t and s .. b - a .. t
            for (near, far) in [(a, &from_b), (b, &from_a)] {
                if let (Some(sn), Some(ft)) = (from_s.dist[near], far.dist[t]) {
                    if sn + 1 + ft == st {
                        through += from_s.sigma[near] * far.sigma[t];
                    }
                }
            }
            if through == 0.0 {
                continue;
            }
            let share = through / from_s.sigma[t];
            let (ps, pt) = (m.peer_of(s), m.peer_of(t));
            let cat = if pa != pb {
                if ps == pt {
                    EdgePathCategory::CrossEdgeEndsTogether
                } else {
                    EdgePathCategory::CrossEdgeApartEnds
                }
            } else {
                match (ps == pa) as u8 + (pt == pa) as u8 {
                    2 => EdgePathCategory::InnerEdgeAllHome,
                    1 => EdgePathCategory::InnerEdgeOneEndHome,
                    _ => EdgePathCategory::InnerEdgeEndsAway,
                }
            };
            categories[cat as usize] += share;
        }
    }
    let all = edge_betweenness(g, DistanceMode::Unit, false, Execution::Sequential)?;
    let total = all.edge_score(e).ok_or(CentralityError::UnknownEdge(e))?;
    Ok(EdgeDecomposition { categories, total })
}

/// Peer-level scores paired by peer id, for ranking helpers elsewhere.
pub fn peer_scores(cv: &CentralityVector) -> Result<&[f64], CentralityError> {
    match cv.scope {
        Scope::Peer => Ok(&cv.scores),
        found => Err(CentralityError::ScopeMismatch {
            expected: "peer",
            found,
        }),
    }
}

/// Peer-edge scores indexed like the projection's adjacency slots.
pub(crate) fn pg_edge_slot_scores(
    cv: &CentralityVector,
    pg: &ProjectionGraph,
) -> Result<Vec<f64>, CentralityError> {
    if cv.scope != Scope::PgEdge {
        return Err(CentralityError::ScopeMismatch {
            expected: "pg_edge",
            found: cv.scope,
        });
    }
    let adj = pg.adjacency();
    let mut out = vec![0.0; adj.targets.len()];
    for p in 0..adj.node_count() {
        for slot in adj.slots(p) {
            let q = adj.targets[slot] as usize;
            let key = EdgeKey::new(p, q).expect("no self-loops");
            out[slot] = cv
                .edge_score(key)
                .ok_or(CentralityError::UnknownEdge(key))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::projection::build_projection;

    fn path3() -> SocialGraph {
        SocialGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn star(leaves: usize) -> SocialGraph {
        SocialGraph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    #[test]
    fn degree_of_worked_example_peer() {
        let (g, m) = fixtures::fifteen_users_five_peers();
        let pg = build_projection(&g, &m).unwrap();
        let cd = degree_centrality(&pg, false);
        assert_eq!(cd.scope, Scope::Peer);
        assert_eq!(cd.scores[1], 3.0);
    }

    #[test]
    fn degree_single_peer_and_degenerate_normalization() {
        let g = path3();
        let pg = build_projection(&g, &Mapping::single_peer(3)).unwrap();
        let raw = degree_centrality(&pg, false);
        assert_eq!(raw.scores, vec![0.0]);
        let norm = degree_centrality(&pg, true);
        assert!(norm.degenerate);
        assert_eq!(norm.scores, vec![0.0]);
        let sg = degree_centrality(&g, true);
        assert_eq!(sg.scores, vec![0.5, 1.0, 0.5]);
        assert!(!sg.degenerate);
    }

    #[test]
    fn node_betweenness_small_cases() {
        let cb = node_betweenness(&path3(), DistanceMode::Unit, false, Execution::Sequential)
            .unwrap();
        assert_eq!(cb.scores, vec![0.0, 1.0, 0.0]);
        let s = node_betweenness(&star(5), DistanceMode::Unit, false, Execution::Sequential)
            .unwrap();
        assert_eq!(s.scores[0], 10.0);
        assert!(s.scores[1..].iter().all(|&x| x == 0.0));
        let norm =
            node_betweenness(&star(5), DistanceMode::Unit, true, Execution::Sequential).unwrap();
        assert_eq!(norm.scores[0], 1.0);
    }

    #[test]
    fn normalization_needs_enough_nodes() {
        let k2 = SocialGraph::from_edges(2, [(0, 1)]).unwrap();
        assert!(matches!(
            node_betweenness(&k2, DistanceMode::Unit, true, Execution::Sequential),
            Err(CentralityError::TooFewNodes { needed: 3, found: 2 })
        ));
        assert!(node_betweenness(&k2, DistanceMode::Unit, false, Execution::Sequential).is_ok());
    }

    #[test]
    fn edge_betweenness_small_cases() {
        let k2 = SocialGraph::from_edges(2, [(0, 1)]).unwrap();
        let e = edge_betweenness(&k2, DistanceMode::Unit, false, Execution::Sequential).unwrap();
        assert_eq!(e.scores, vec![1.0]);
        assert_eq!(e.scope, Scope::SgEdge);
        let p = edge_betweenness(&path3(), DistanceMode::Unit, false, Execution::Sequential)
            .unwrap();
        assert_eq!(p.scores, vec![2.0, 2.0]);
        assert_eq!(p.edges, vec![EdgeKey::new(0, 1).unwrap(), EdgeKey::new(1, 2).unwrap()]);
    }

    #[test]
    fn heavy_bundles_shorten_paths() {
        // 4-cycle: 0-1 and 1-2 heavy, 2-3 and 3-0 light
        let pg =
            ProjectionGraph::from_weighted_edges(4, [(0, 1, 4), (1, 2, 4), (2, 3, 1), (0, 3, 1)])
                .unwrap();
        let unit = node_betweenness(&pg, DistanceMode::Unit, false, Execution::Sequential)
            .unwrap();
        assert_eq!(unit.scores, vec![0.5; 4]);
        let inv = node_betweenness(&pg, DistanceMode::InverseWeight, false, Execution::Sequential)
            .unwrap();
        // 0-2 goes through 1 (cost 0.5); 1-3 splits between 0 and 2 (1.25 each)
        assert_eq!(inv.scores, vec![0.5, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn social_graphs_ignore_inverse_weight_mode() {
        let cb = node_betweenness(&path3(), DistanceMode::InverseWeight, false, Execution::Sequential)
            .unwrap();
        assert_eq!(cb.distance, DistanceMode::Unit);
    }

    #[test]
    fn cumulative_of_users() {
        let g = SocialGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (1, 3)]).unwrap();
        let m = Mapping::from_labels(&[0, 1, 0, 1]);
        let pg = build_projection(&g, &m).unwrap();
        let cd = degree_centrality(&g, false);
        let est = cumulative_estimate(&cd, &m, &pg).unwrap();
        assert_eq!(est.scores, vec![3.0, 5.0]);
        assert_eq!(est.scope, Scope::Peer);

        let single = Mapping::singletons(4);
        let spg = build_projection(&g, &single).unwrap();
        assert_eq!(cumulative_estimate(&cd, &single, &spg).unwrap().scores, cd.scores);
        assert!(matches!(
            cumulative_estimate(&est, &m, &pg),
            Err(CentralityError::ScopeMismatch { .. })
        ));
    }

    #[test]
    fn cumulative_of_edges_skips_intra() {
        let g = SocialGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = Mapping::from_labels(&[0, 0, 1, 1]);
        let pg = build_projection(&g, &m).unwrap();
        let eb = edge_betweenness(&g, DistanceMode::Unit, false, Execution::Sequential).unwrap();
        let est = cumulative_estimate(&eb, &m, &pg).unwrap();
        assert_eq!(est.scope, Scope::PgEdge);
        assert_eq!(est.scores, vec![4.0]); // middle edge of P4
    }

    #[test]
    fn decomposition_extremes() {
        let g = SocialGraph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let single = betweenness_decomposition_check(&g, &Mapping::singletons(5), 1).unwrap();
        let one = betweenness_decomposition_check(&g, &Mapping::single_peer(5), 1).unwrap();
        assert!(single.total > 0.0);
        assert_eq!(single.category(NodePathCategory::Scattered), single.total);
        assert_eq!(one.category(NodePathCategory::AllHome), one.total);

        let e = EdgeKey::new(2, 3).unwrap();
        let single = edge_decomposition_check(&g, &Mapping::singletons(5), e).unwrap();
        assert_eq!(single.category(EdgePathCategory::CrossEdgeApartEnds), single.total);
        let one = edge_decomposition_check(&g, &Mapping::single_peer(5), e).unwrap();
        assert_eq!(one.category(EdgePathCategory::InnerEdgeAllHome), one.total);
        assert!(edge_decomposition_check(&g, &Mapping::single_peer(5), EdgeKey::new(0, 4).unwrap())
            .is_err());
    }

    #[test]
    fn csv_output() {
        let cb = node_betweenness(&path3(), DistanceMode::Unit, false, Execution::Sequential)
            .unwrap();
        let mut buf = Vec::new();
        cb.write_csv(&mut buf, &|i| i as u64 * 10).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "# metric=node_betweenness scope=user normalized=false distance_mode=unit\nid,score\n0,0\n10,1\n20,0\n"
        );
    }

    #[test]
    fn ranking_is_score_desc_then_id() {
        let s = node_betweenness(&star(3), DistanceMode::Unit, false, Execution::Sequential)
            .unwrap();
        assert_eq!(s.ranking(), vec![0, 1, 2, 3]);
    }
}
