//! Exhaustive reference computations for small graphs. Everything here works
//! by listing every simple path, so it shares no code with the library's
//! shortest-path machinery.

#![allow(dead_code)]

use projgraph::{Mapping, ProjectionGraph, SocialGraph};

/// Two path lengths closer than this are the same length.
const LENGTH_EPS: f64 = 1e-9;

/// Undirected graph with a positive length on every edge.
pub struct LengthGraph {
    pub n: usize,
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl LengthGraph {
    pub fn unit(g: &SocialGraph) -> Self {
        let n = g.node_count();
        let mut adj = vec![Vec::new(); n];
        for (u, v) in g.edges() {
            adj[u].push((v, 1.0));
            adj[v].push((u, 1.0));
        }
        LengthGraph { n, adj }
    }

    /// Peer edges of weight `w` get length `1/w`, or 1 when `unit` is set.
    pub fn projection(pg: &ProjectionGraph, unit: bool) -> Self {
        let n = pg.peer_count();
        let mut adj = vec![Vec::new(); n];
        for (i, j, w) in pg.edges() {
            let len = if unit { 1.0 } else { 1.0 / w as f64 };
            adj[i].push((j, len));
            adj[j].push((i, len));
        }
        LengthGraph { n, adj }
    }
}

/// Every shortest path of every unordered pair `s < t`.
pub struct ShortestPaths {
    /// `(s, t, paths)`; each path lists its nodes from `s` to `t`.
    pub pairs: Vec<(usize, usize, Vec<Vec<usize>>)>,
}

fn walk(
    g: &LengthGraph,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    len: f64,
    found: &mut Vec<Vec<(f64, Vec<usize>)>>,
) {
    let here = *path.last().unwrap();
    found[here].push((len, path.clone()));
    for &(next, l) in &g.adj[here] {
        if !on_path[next] {
            on_path[next] = true;
            path.push(next);
            walk(g, path, on_path, len + l, found);
            path.pop();
            on_path[next] = false;
        }
    }
}

pub fn shortest_paths(g: &LengthGraph) -> ShortestPaths {
    let mut pairs = Vec::new();
    for s in 0..g.n {
        let mut found = vec![Vec::new(); g.n];
        let mut on_path = vec![false; g.n];
        on_path[s] = true;
        walk(g, &mut vec![s], &mut on_path, 0.0, &mut found);
        for (t, paths) in found.into_iter().enumerate().skip(s + 1) {
            if paths.is_empty() {
                continue;
            }
            let best = paths.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let shortest = paths
                .into_iter()
                .filter(|(l, _)| *l <= best + LENGTH_EPS)
                .map(|(_, p)| p)
                .collect();
            pairs.push((s, t, shortest));
        }
    }
    ShortestPaths { pairs }
}

/// Raw node betweenness over unordered pairs, endpoints excluded.
pub fn node_betweenness(g: &LengthGraph) -> Vec<f64> {
    let mut out = vec![0.0; g.n];
    for (_, _, paths) in shortest_paths(g).pairs {
        let share = 1.0 / paths.len() as f64;
        for p in &paths {
            for &v in &p[1..p.len() - 1] {
                out[v] += share;
            }
        }
    }
    out
}

/// Raw edge betweenness over unordered pairs, keyed by `(low, high)` and
/// sorted by key.
pub fn edge_betweenness(g: &LengthGraph) -> Vec<((usize, usize), f64)> {
    let mut keys: Vec<(usize, usize)> = (0..g.n)
        .flat_map(|u| g.adj[u].iter().filter(move |e| e.0 > u).map(move |e| (u, e.0)))
        .collect();
    keys.sort_unstable();
    let mut out = vec![0.0; keys.len()];
    for (_, _, paths) in shortest_paths(g).pairs {
        let share = 1.0 / paths.len() as f64;
        for p in &paths {
            for w in p.windows(2) {
                let key = (w[0].min(w[1]), w[0].max(w[1]));
                out[keys.binary_search(&key).unwrap()] += share;
            }
        }
    }
    keys.into_iter().zip(out).collect()
}

/// Betweenness of user `u` split by where each pair's endpoints are mapped:
/// `[scattered, one endpoint home, endpoints together away, all home]`.
pub fn node_categories(g: &SocialGraph, m: &Mapping, u: usize) -> [f64; 4] {
    let home = m.peer_of(u);
    let mut out = [0.0; 4];
    for (s, t, paths) in shortest_paths(&LengthGraph::unit(g)).pairs {
        let through = paths.iter().filter(|p| p[1..p.len() - 1].contains(&u)).count();
        if through == 0 {
            continue;
        }
        let (ps, pt) = (m.peer_of(s), m.peer_of(t));
        let cat = match (ps == home, pt == home) {
            (true, true) => 3,
            (true, false) | (false, true) => 1,
            (false, false) if ps == pt => 2,
            _ => 0,
        };
        out[cat] += through as f64 / paths.len() as f64;
    }
    out
}

/// Betweenness of edge `a-b` split into
/// `[cross edge apart ends, inner all home, inner one end home,
///   cross edge ends together, inner ends away]`.
pub fn edge_categories(g: &SocialGraph, m: &Mapping, a: usize, b: usize) -> [f64; 5] {
    let (pa, pb) = (m.peer_of(a), m.peer_of(b));
    let mut out = [0.0; 5];
    for (s, t, paths) in shortest_paths(&LengthGraph::unit(g)).pairs {
        let through = paths
            .iter()
            .filter(|p| p.windows(2).any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a)))
            .count();
        if through == 0 {
            continue;
        }
        let (ps, pt) = (m.peer_of(s), m.peer_of(t));
        let cat = if pa != pb {
            if ps == pt {
                3
            } else {
                0
            }
        } else {
            match (ps == pa) as u8 + (pt == pa) as u8 {
                2 => 1,
                1 => 2,
                _ => 4,
            }
        };
        out[cat] += through as f64 / paths.len() as f64;
    }
    out
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
