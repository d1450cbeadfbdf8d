//! Seeded random graph generators for tests, benches and desk-scale runs.
//! All generators return connected graphs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::SocialGraph;

/// Random spanning tree plus every remaining pair independently with
/// probability `p`.
pub fn connected_gnp(n: usize, p: f64, seed: u64) -> SocialGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        edges.push((order[i], parent));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    SocialGraph::from_edges(n, edges).expect("generated ids are in range")
}

/// Holme-Kim growth: each new node attaches `links` edges by preferential
/// attachment, each followed by a triad-closing edge with probability
/// `triad_p`. Heavy-tailed degrees with clustering, similar in texture to
/// the social and file-sharing graphs the tool targets.
pub fn powerlaw_cluster(n: usize, links: usize, triad_p: f64, seed: u64) -> SocialGraph {
    assert!(links >= 1 && n > links, "need n > links >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    // endpoint list: picking uniformly from it is degree-proportional
    let mut ends: Vec<usize> = Vec::new();
    let add = |adj: &mut Vec<Vec<usize>>, ends: &mut Vec<usize>, a: usize, b: usize| {
        if a != b && !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
            ends.push(a);
            ends.push(b);
            true
        } else {
            false
        }
    };
    for v in 1..=links {
        add(&mut adj, &mut ends, 0, v);
    }
    for v in links + 1..n {
        let mut made = 0;
        let mut last: Option<usize> = None;
        let mut guard = 0;
        while made < links && guard < 50 * links {
            guard += 1;
            let target = match last {
                Some(prev) if rng.gen_bool(triad_p) && !adj[prev].is_empty() => {
                    adj[prev][rng.gen_range(0..adj[prev].len())]
                }
                _ => ends[rng.gen_range(0..ends.len())],
            };
            if add(&mut adj, &mut ends, v, target) {
                made += 1;
                last = Some(target);
            }
        }
        if made == 0 {
            add(&mut adj, &mut ends, v, rng.gen_range(0..v));
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, ns)| ns.iter().map(move |&v| (u, v)));
    SocialGraph::from_edges(n, edges).expect("generated ids are in range")
}

/// `communities` dense blocks of `size` users (internal edge probability
/// `p_in`) arranged on a ring, with `bridges` random edges between each pair
/// of ring neighbours and `noise` extra uniformly random edges.
pub fn planted_communities(
    communities: usize,
    size: usize,
    p_in: f64,
    bridges: usize,
    noise: usize,
    seed: u64,
) -> SocialGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = communities * size;
    let mut edges = Vec::new();
    for c in 0..communities {
        let base = c * size;
        for i in 1..size {
            // path keeps each block connected
            edges.push((base + i - 1, base + i));
            for j in 0..i - 1 {
                if rng.gen_bool(p_in) {
                    edges.push((base + j, base + i));
                }
            }
        }
        if communities > 1 {
            let next = ((c + 1) % communities) * size;
            for _ in 0..bridges.max(1) {
                edges.push((base + rng.gen_range(0..size), next + rng.gen_range(0..size)));
            }
        }
    }
    for _ in 0..noise {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    SocialGraph::from_edges(n, edges).expect("generated ids are in range")
}

/// Uniform random mapping of `users` onto at most `peers` peers.
pub fn random_labels(users: usize, peers: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..users).map(|_| rng.gen_range(0..peers.max(1))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_connected_and_seeded() {
        for seed in 0..5 {
            assert!(connected_gnp(12, 0.2, seed).is_connected());
            assert!(powerlaw_cluster(300, 2, 0.5, seed).is_connected());
            assert!(planted_communities(6, 10, 0.5, 2, 5, seed).is_connected());
        }
        assert_eq!(powerlaw_cluster(200, 3, 0.3, 9), powerlaw_cluster(200, 3, 0.3, 9));
        assert_ne!(connected_gnp(20, 0.2, 1), connected_gnp(20, 0.2, 2));
    }
}
