//! Weighted peer graph induced by a user-to-peer mapping.

use std::io::{self, Write};

use crate::community::{CommunityError, Mapping, PeerId};
use crate::graph::{AdjacencyView, GraphError, Layer, SocialGraph, Topology};

/// Projection graph: peers joined by bundles of social edges. The weight of a
/// peer edge is the exact number of social edges it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<u64>,
    intra: Vec<u64>,
    sizes: Vec<usize>,
}

impl ProjectionGraph {
    /// Standalone weighted peer graph, for experiments that do not start from
    /// a social graph. Every peer gets size 1 and no intra-peer edges;
    /// repeated pairs add up.
    pub fn from_weighted_edges<I>(peer_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (PeerId, PeerId, u64)>,
    {
        let mut bundles: Vec<(u32, u32, u64)> = Vec::new();
        for (a, b, w) in edges {
            if a >= peer_count || b >= peer_count {
                return Err(GraphError::UnknownNode(a.max(b)));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if w > 0 {
                bundles.push((a as u32, b as u32, w));
                bundles.push((b as u32, a as u32, w));
            }
        }
        Ok(Self::from_bundles(peer_count, bundles, vec![0; peer_count], vec![1; peer_count]))
    }

    /// `bundles` holds both directions of every social edge crossing peers,
    /// with per-entry weights that are summed per pair.
    fn from_bundles(
        peers: usize,
        mut bundles: Vec<(u32, u32, u64)>,
        intra: Vec<u64>,
        sizes: Vec<usize>,
    ) -> Self {
        bundles.sort_unstable_by_key(|&(a, b, _)| (a, b));
        let mut offsets = vec![0usize; peers + 1];
        let mut targets = Vec::new();
        let mut weights: Vec<u64> = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for (a, b, w) in bundles {
            if last == Some((a, b)) {
                *weights.last_mut().expect("same bundle") += w;
            } else {
                targets.push(b);
                weights.push(w);
                offsets[a as usize + 1] += 1;
                last = Some((a, b));
            }
        }
        for i in 0..peers {
            offsets[i + 1] += offsets[i];
        }
        ProjectionGraph {
            offsets,
            targets,
            weights,
            intra,
            sizes,
        }
    }

    pub fn peer_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Neighbouring peers of `p`, ascending.
    pub fn neighbors(&self, p: PeerId) -> &[u32] {
        &self.targets[self.offsets[p]..self.offsets[p + 1]]
    }

    /// Weights aligned with [`ProjectionGraph::neighbors`].
    pub fn neighbor_weights(&self, p: PeerId) -> &[u64] {
        &self.weights[self.offsets[p]..self.offsets[p + 1]]
    }

    /// Social edges between peers `i` and `j`; zero when the peers are not adjacent or equal.
    pub fn weight(&self, i: PeerId, j: PeerId) -> u64 {
        self.adjacency()
            .slot_of(i, j)
            .map_or(0, |slot| self.weights[slot])
    }

    /// Social edges with both ends on `p`.
    pub fn intra_edges(&self, p: PeerId) -> u64 {
        self.intra[p]
    }

    pub fn peer_size(&self, p: PeerId) -> usize {
        self.sizes[p]
    }

    /// Every peer edge once as `(i, j, weight)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (PeerId, PeerId, u64)> + '_ {
        (0..self.peer_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .zip(self.neighbor_weights(i))
                .filter(move |(&j, _)| j as usize > i)
                .map(move |(&j, &w)| (i, j as usize, w))
        })
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum::<u64>() / 2
    }

    pub fn total_intra(&self) -> u64 {
        self.intra.iter().sum()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.peer_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(p) = stack.pop() {
            for &q in self.neighbors(p) {
                let q = q as usize;
                if !seen[q] {
                    seen[q] = true;
                    count += 1;
                    stack.push(q);
                }
            }
        }
        count == n
    }

    /// Writes `peer_i,peer_j,weight`, one row per peer edge.
    pub fn write_edges_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "peer_i,peer_j,weight")?;
        for (i, j, w) in self.edges() {
            writeln!(out, "{i},{j},{w}")?;
        }
        Ok(())
    }

    /// Writes the `peer_id,size,intra_edges` sidecar.
    pub fn write_peers_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "peer_id,size,intra_edges")?;
        for p in 0..self.peer_count() {
            writeln!(out, "{p},{},{}", self.sizes[p], self.intra[p])?;
        }
        Ok(())
    }
}

impl Topology for ProjectionGraph {
    fn adjacency(&self) -> AdjacencyView<'_> {
        AdjacencyView {
            offsets: &self.offsets,
            targets: &self.targets,
            weights: Some(&self.weights),
        }
    }

    fn layer(&self) -> Layer {
        Layer::Projection
    }
}

/// Projects `g` through `m`: intra-peer edges are counted per peer, every
/// other edge adds one to the weight of its peer pair.
pub fn build_projection(g: &SocialGraph, m: &Mapping) -> Result<ProjectionGraph, CommunityError> {
    m.check_covers(g)?;
    let peers = m.peer_count();
    let mut intra = vec![0u64; peers];
    let mut bundles: Vec<(u32, u32, u64)> = Vec::with_capacity(2 * g.edge_count());
    for (u, v) in g.edges() {
        let (a, b) = (m.peer_of(u), m.peer_of(v));
        if a == b {
            intra[a] += 1;
        } else {
            bundles.push((a as u32, b as u32, 1));
            bundles.push((b as u32, a as u32, 1));
        }
    }
    Ok(ProjectionGraph::from_bundles(peers, bundles, intra, m.sizes()))
}

/// Average social edges inside a peer and per peer edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBalance {
    pub avg_intra_per_peer: f64,
    /// 0 when the projection has no edges; see `inter_defined`.
    pub avg_inter_per_pg_edge: f64,
    pub inter_defined: bool,
}

pub fn edge_balance_report(pg: &ProjectionGraph) -> EdgeBalance {
    let avg_intra = pg.total_intra() as f64 / pg.peer_count().max(1) as f64;
    let edges = pg.edge_count();
    EdgeBalance {
        avg_intra_per_peer: avg_intra,
        avg_inter_per_pg_edge: if edges == 0 {
            0.0
        } else {
            pg.total_weight() as f64 / edges as f64
        },
        inter_defined: edges > 0,
    }
}
