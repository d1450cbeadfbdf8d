//! Simple undirected social graphs in compressed sparse row form.
//!
//! Users get dense internal ids `0..n` assigned in ascending order of their
//! external (file) ids, so the id-map is monotone and survives a write/reload
//! round trip unchanged.

use std::collections::VecDeque;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Dense internal id of a user.
pub type UserId = usize;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected two integer node ids, found {content:?}")]
    Malformed { line: usize, content: String },
    #[error("graph has no edges after removing self-loops and duplicates")]
    Empty,
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("edge endpoints must differ (got {0}, {0})")]
    SelfLoop(usize),
}

/// Unordered node pair, stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey(u32, u32);

impl EdgeKey {
    pub fn new(a: usize, b: usize) -> Result<Self, GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Ok(EdgeKey(lo as u32, hi as u32))
    }

    pub fn low(self) -> usize {
        self.0 as usize
    }

    pub fn high(self) -> usize {
        self.1 as usize
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Borrowed CSR adjacency. `weights` is `None` for unit-weight graphs.
#[derive(Debug, Clone, Copy)]
pub struct AdjacencyView<'a> {
    pub offsets: &'a [usize],
    pub targets: &'a [u32],
    pub weights: Option<&'a [u64]>,
}

impl<'a> AdjacencyView<'a> {
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, u: usize) -> &'a [u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Weight stored at adjacency slot `slot`.
    pub fn weight_at(&self, slot: usize) -> u64 {
        self.weights.map_or(1, |w| w[slot])
    }

    pub fn slots(&self, u: usize) -> std::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Adjacency slot of `v` in `u`'s list.
    pub fn slot_of(&self, u: usize, v: usize) -> Option<usize> {
        let r = self.slots(u);
        self.targets[r.clone()]
            .binary_search(&(v as u32))
            .ok()
            .map(|i| r.start + i)
    }
}

/// Which graph of the model a topology belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    /// Users and social edges.
    Social,
    /// Peers and weighted peer edges.
    Projection,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Social => "sg",
            Layer::Projection => "pg",
        }
    }
}

/// Graphs that centrality and search code can run over.
pub trait Topology: Sync {
    fn adjacency(&self) -> AdjacencyView<'_>;

    fn layer(&self) -> Layer;
}

/// Undirected, unweighted, simple graph of users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    external_ids: Vec<u64>,
}

impl SocialGraph {
    /// Builds a graph on `node_count` nodes whose external ids equal their
    /// internal ids. Self-loops and duplicate edges are dropped.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::with_external_ids((0..node_count as u64).collect(), edges)
    }

    /// `external_ids` must be strictly ascending; edges use internal ids.
    pub fn with_external_ids<I>(external_ids: Vec<u64>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        debug_assert!(external_ids.windows(2).all(|w| w[0] < w[1]));
        let n = external_ids.len();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (a, b) in edges {
            if a >= n {
                return Err(GraphError::UnknownNode(a));
            }
            if b >= n {
                return Err(GraphError::UnknownNode(b));
            }
            if a == b {
                continue;
            }
            pairs.push((a as u32, b as u32));
            pairs.push((b as u32, a as u32));
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &pairs {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.into_iter().map(|(_, b)| b).collect();
        Ok(SocialGraph {
            offsets,
            targets,
            external_ids,
        })
    }

    pub fn node_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, u: UserId) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: UserId) -> Result<usize, GraphError> {
        if u >= self.node_count() {
            return Err(GraphError::UnknownNode(u));
        }
        Ok(self.offsets[u + 1] - self.offsets[u])
    }

    pub fn has_edge(&self, u: UserId, v: UserId) -> bool {
        u < self.node_count() && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Every edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn external_id(&self, u: UserId) -> u64 {
        self.external_ids[u]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.external_ids
    }

    pub fn internal_id(&self, external: u64) -> Option<UserId> {
        self.external_ids.binary_search(&external).ok()
    }

    /// Connected-component label per node; labels are numbered in order of
    /// their smallest member.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    let v = v as usize;
                    if label[v] == usize::MAX {
                        label[v] = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() > 0 && self.component_labels().1 == 1
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: UserId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in self.neighbors(u) {
                let v = v as usize;
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Subgraph induced on `nodes`, relabelled in ascending id order. Returns
    /// the subgraph and the old-to-new id map.
    pub fn induced_subgraph(&self, nodes: &[UserId]) -> (SocialGraph, Vec<Option<UserId>>) {
        let mut keep: Vec<UserId> = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut old_to_new = vec![None; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            old_to_new[old] = Some(new);
        }
        let mut offsets = Vec::with_capacity(keep.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for &old in &keep {
            targets.extend(
                self.neighbors(old)
                    .iter()
                    .filter_map(|&v| old_to_new[v as usize].map(|x| x as u32)),
            );
            offsets.push(targets.len());
        }
        let external_ids = keep.iter().map(|&u| self.external_ids[u]).collect();
        (
            SocialGraph {
                offsets,
                targets,
                external_ids,
            },
            old_to_new,
        )
    }
}

impl Topology for SocialGraph {
    fn adjacency(&self) -> AdjacencyView<'_> {
        AdjacencyView {
            offsets: &self.offsets,
            targets: &self.targets,
            weights: None,
        }
    }

    fn layer(&self) -> Layer {
        Layer::Social
    }
}

/// Parses a SNAP-style edge list: `#` comments, two whitespace-separated
/// integer ids per line, extra tokens ignored.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<SocialGraph, GraphError> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| GraphError::Io {
            path: PathBuf::from("<reader>"),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let parsed = match (tokens.next(), tokens.next()) {
            (Some(a), Some(b)) => a.parse::<u64>().ok().zip(b.parse::<u64>().ok()),
            _ => None,
        };
        match parsed {
            Some((a, b)) if a != b => raw.push((a, b)),
            Some(_) => {}
            None => {
                return Err(GraphError::Malformed {
                    line: idx + 1,
                    content: line.clone(),
                })
            }
        }
    }
    if raw.is_empty() {
        return Err(GraphError::Empty);
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index = |x: u64| ids.binary_search(&x).expect("id collected above");
    let edges: Vec<(usize, usize)> = raw.iter().map(|&(a, b)| (index(a), index(b))).collect();
    SocialGraph::with_external_ids(ids.clone(), edges)
}

/// Loads a SNAP edge-list file.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<SocialGraph, GraphError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| GraphError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(BufReader::new(file)).map_err(|e| match e {
        GraphError::Io { source, .. } => GraphError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Largest connected component and the old-to-new id map. Ties go to the
/// component holding the smallest external id.
pub fn largest_connected_component(
    g: &SocialGraph,
) -> Result<(SocialGraph, Vec<Option<UserId>>), GraphError> {
    if g.node_count() == 0 {
        return Err(GraphError::Empty);
    }
    let (labels, count) = g.component_labels();
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    // Labels follow the order of each component's smallest node, and internal
    // order matches external order, so the first maximum wins the tie.
    let best = (0..count)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
        .expect("at least one component");
    let nodes: Vec<UserId> = (0..g.node_count()).filter(|&u| labels[u] == best).collect();
    Ok(g.induced_subgraph(&nodes))
}

/// Writes `external_u<TAB>external_v`, one line per edge.
pub fn write_edge_list<W: Write>(g: &SocialGraph, mut out: W) -> io::Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{}\t{}", g.external_id(u), g.external_id(v))?;
    }
    Ok(())
}

/// Writes the `internal_id,external_id` CSV.
pub fn write_id_map<W: Write>(g: &SocialGraph, mut out: W) -> io::Result<()> {
    writeln!(out, "internal_id,external_id")?;
    for (i, ext) in g.external_ids.iter().enumerate() {
        writeln!(out, "{i},{ext}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SocialGraph, GraphError> {
        parse_edge_list(s.as_bytes())
    }

    #[test]
    fn minimal_path_file() {
        let g = parse("0 1\n1 2").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
    }

    #[test]
    fn duplicates_and_self_loops_collapse() {
        let g = parse("0 1\n1 0\n0 0").unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
    }

    #[test]
    fn comments_tabs_and_extra_tokens() {
        let g = parse("# Directed graph\n# FromNodeId\tToNodeId\n10\t20\t0.5\n20 30 x y\n").unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.external_ids(), &[10, 20, 30]);
        assert_eq!(g.internal_id(30), Some(2));
    }

    #[test]
    fn malformed_line_reports_number() {
        match parse("0 1\n# ok\n2\n") {
            Err(GraphError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("a b\n"), Err(GraphError::Malformed { line: 1, .. })));
    }

    #[test]
    fn only_self_loops_is_empty() {
        assert!(matches!(parse("3 3\n# c\n"), Err(GraphError::Empty)));
        assert!(matches!(parse(""), Err(GraphError::Empty)));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_edge_list("/definitely/not/here.txt").unwrap_err();
        assert!(matches!(err, GraphError::Io { .. }));
    }

    #[test]
    fn degrees() {
        let star = SocialGraph::from_edges(5, (1..5).map(|v| (0, v))).unwrap();
        assert_eq!(star.degree(0).unwrap(), 4);
        let p3 = SocialGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(p3.degree(2).unwrap(), 1);
        assert!(matches!(p3.degree(3), Err(GraphError::UnknownNode(3))));
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let p3 = SocialGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let (lcc, map) = largest_connected_component(&p3).unwrap();
        assert_eq!(lcc, p3);
        assert_eq!(map, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn lcc_picks_triangle_over_edge() {
        let g = SocialGraph::from_edges(5, [(0, 1), (2, 3), (3, 4), (2, 4)]).unwrap();
        let (lcc, map) = largest_connected_component(&g).unwrap();
        assert_eq!((lcc.node_count(), lcc.edge_count()), (3, 3));
        assert_eq!(lcc.external_ids(), &[2, 3, 4]);
        assert_eq!(map[0], None);
        assert_eq!(map[4], Some(2));
    }

    #[test]
    fn lcc_tie_prefers_smallest_external_id() {
        let g = parse("7 8\n1 5\n").unwrap();
        let (lcc, _) = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.external_ids(), &[1, 5]);
    }

    #[test]
    fn edge_key_orders_endpoints() {
        let k = EdgeKey::new(5, 2).unwrap();
        assert_eq!((k.low(), k.high()), (2, 5));
        assert!(EdgeKey::new(3, 3).is_err());
    }

    #[test]
    fn write_and_reload_round_trip() {
        let g = parse("5 9\n9 2\n2 5\n2 11\n").unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(parse_edge_list(buf.as_slice()).unwrap(), g);

        let mut ids = Vec::new();
        write_id_map(&g, &mut ids).unwrap();
        assert_eq!(
            String::from_utf8(ids).unwrap(),
            "internal_id,external_id\n0,2\n1,5\n2,9\n3,11\n"
        );
    }
}
