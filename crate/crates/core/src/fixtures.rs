//! Small hand-built instances used by tests and examples.

use crate::community::Mapping;
use crate::graph::SocialGraph;

/// Fifteen users `a`..`o` (ids 0..14) on five peers `P1`..`P5` (ids 0..4).
///
/// ```text
/// P1: a b c    P2: d e f g    P3: h i j    P4: k l m    P5: n o
/// ```
///
/// `P2`-`P4` carries the three social edges `d-k`, `d-l`, `d-m`; `P2` also
/// reaches `P1` through `g-b` and `P3` through `f-h`, giving it three
/// neighbouring peers. `P3`-`P5` (`j-n`) and `P4`-`P5` (`m-o`) close the
/// overlay.
pub fn fifteen_users_five_peers() -> (SocialGraph, Mapping) {
    let [a, b, c, d, e, f, g, h, i, j, k, l, m, n, o] = std::array::from_fn(|x| x);
    let edges = [
        (a, b),
        (b, c),
        (a, c),
        (d, e),
        (e, f),
        (f, g),
        (d, g),
        (h, i),
        (i, j),
        (k, l),
        (l, m),
        (n, o),
        (g, b),
        (d, k),
        (d, l),
        (d, m),
        (f, h),
        (j, n),
        (m, o),
    ];
    let graph = SocialGraph::from_edges(15, edges).expect("valid fixture");
    let peers = [0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4];
    (graph, Mapping::from_labels(&peers))
}

/// Two 4-cliques joined by the bridge 3-4.
pub fn two_cliques_with_bridge() -> SocialGraph {
    let mut edges = Vec::new();
    for base in [0, 4] {
        for x in 0..4 {
            for y in x + 1..4 {
                edges.push((base + x, base + y));
            }
        }
    }
    edges.push((3, 4));
    SocialGraph::from_edges(8, edges).expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shapes() {
        let (g, m) = fifteen_users_five_peers();
        assert_eq!((g.node_count(), g.edge_count()), (15, 19));
        assert!(g.is_connected());
        assert_eq!(m.sizes(), vec![3, 4, 3, 3, 2]);
        assert_eq!(two_cliques_with_bridge().edge_count(), 13);
    }
}
