//! User-to-peer mappings and the community detectors that produce them.
//!
//! Every mapping is total: each user sits on exactly one peer and every peer
//! holds at least one user. Peer ids are dense and, whenever a mapping is
//! built from arbitrary labels, assigned in ascending label order so that
//! relabelling never changes the relative order of communities.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{SocialGraph, UserId};

/// Dense internal id of a peer (community).
pub type PeerId = usize;

/// Minimum modularity gain for a Louvain move.
pub const MODULARITY_TOLERANCE: f64 = 1e-9;

/// Default community-size cap for Recursive-Louvain.
pub const DEFAULT_MAX_SIZE: usize = 100;

/// Accepted relative deviation of the achieved mean from a merge target.
pub const TARGET_TOLERANCE: f64 = 0.10;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("mapping covers {found} users but the graph has {expected}")]
    MappingSize { expected: usize, found: usize },
    #[error("user {0} is missing from the mapping")]
    UnmappedUser(u64),
    #[error("user {0} appears more than once in the mapping")]
    DuplicateUser(u64),
    #[error("modularity is undefined on a graph without edges")]
    EmptyGraph,
    #[error("target average {target} is below the current mean community size {mean:.3}")]
    TargetBelowMean { target: usize, mean: f64 },
    #[error("target average must be positive")]
    ZeroTarget,
    #[error("max_size must be at least 2 (got {0})")]
    MaxSizeTooSmall(usize),
    #[error("user {0} belongs to no group")]
    UserWithoutGroup(u64),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Total assignment of users to peers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    assignment: Vec<u32>,
    peer_count: usize,
}

impl Mapping {
    /// Densifies arbitrary community labels, numbering peers in ascending
    /// label order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut distinct: Vec<usize> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let assignment = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label present") as u32)
            .collect();
        Mapping {
            assignment,
            peer_count: distinct.len(),
        }
    }

    /// Every user on its own peer.
    pub fn singletons(user_count: usize) -> Self {
        Mapping {
            assignment: (0..user_count as u32).collect(),
            peer_count: user_count,
        }
    }

    /// Every user on peer 0.
    pub fn single_peer(user_count: usize) -> Self {
        Mapping {
            assignment: vec![0; user_count],
            peer_count: usize::from(user_count > 0),
        }
    }

    pub fn user_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn peer_count(&self) -> usize {
        self.peer_count
    }

    pub fn peer_of(&self, u: UserId) -> PeerId {
        self.assignment[u] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    /// Users per peer, each list ascending.
    pub fn members(&self) -> Vec<Vec<UserId>> {
        let mut out = vec![Vec::new(); self.peer_count];
        for (u, &p) in self.assignment.iter().enumerate() {
            out[p as usize].push(u);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.peer_count];
        for &p in &self.assignment {
            sizes[p as usize] += 1;
        }
        sizes
    }

    pub fn mean_size(&self) -> f64 {
        self.user_count() as f64 / self.peer_count.max(1) as f64
    }

    pub fn stats(&self) -> PartitionStats {
        PartitionStats::from_sizes(&self.sizes())
    }

    /// Checks that the mapping covers exactly the users of `g`.
    pub fn check_covers(&self, g: &SocialGraph) -> Result<(), CommunityError> {
        if self.user_count() != g.node_count() {
            return Err(CommunityError::MappingSize {
                expected: g.node_count(),
                found: self.user_count(),
            });
        }
        Ok(())
    }
}

/// Summary statistics of community sizes. The standard deviation is the
/// population one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionStats {
    pub community_count: usize,
    pub mean_size: f64,
    pub std_dev_size: f64,
    pub min_size: usize,
    pub max_size: usize,
}

impl PartitionStats {
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let count = sizes.len();
        let mean = sizes.iter().sum::<usize>() as f64 / count.max(1) as f64;
        let var = sizes
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / count.max(1) as f64;
        PartitionStats {
            community_count: count,
            mean_size: mean,
            std_dev_size: var.sqrt(),
            min_size: sizes.iter().copied().min().unwrap_or(0),
            max_size: sizes.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.serialize(self)?;
        w.flush()?;
        Ok(())
    }
}

/// Newman modularity of `m` on `g`.
pub fn modularity(g: &SocialGraph, m: &Mapping) -> Result<f64, CommunityError> {
    m.check_covers(g)?;
    let edges = g.edge_count() as f64;
    if edges == 0.0 {
        return Err(CommunityError::EmptyGraph);
    }
    let mut internal = vec![0u64; m.peer_count()];
    let mut degree_sum = vec![0u64; m.peer_count()];
    for u in 0..g.node_count() {
        degree_sum[m.peer_of(u)] += g.neighbors(u).len() as u64;
    }
    for (u, v) in g.edges() {
        if m.peer_of(u) == m.peer_of(v) {
            internal[m.peer_of(u)] += 1;
        }
    }
    Ok(internal
        .iter()
        .zip(&degree_sum)
        .map(|(&l, &d)| l as f64 / edges - (d as f64 / (2.0 * edges)).powi(2))
        .sum())
}

/// Weighted graph used by the Louvain aggregation levels. `links` excludes
/// self-loops, which live in `self_weight`.
struct LevelGraph {
    links: Vec<Vec<(usize, f64)>>,
    self_weight: Vec<f64>,
}

impl LevelGraph {
    fn from_social(g: &SocialGraph) -> Self {
        LevelGraph {
            links: (0..g.node_count())
                .map(|u| g.neighbors(u).iter().map(|&v| (v as usize, 1.0)).collect())
                .collect(),
            self_weight: vec![0.0; g.node_count()],
        }
    }

    fn len(&self) -> usize {
        self.links.len()
    }

    fn strength(&self, i: usize) -> f64 {
        self.links[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_weight[i]
    }

    /// One round of local moves. Returns the community of every node, labelled
    /// by node id of some member, and whether anything moved.
    fn local_moves(&self, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let strength: Vec<f64> = (0..n).map(|i| self.strength(i)).collect();
        let two_m: f64 = strength.iter().sum();
        let mut community: Vec<usize> = (0..n).collect();
        if two_m == 0.0 {
            return (community, false);
        }
        let m = two_m / 2.0;
        let mut total = strength.clone();
        let mut link_to = vec![0.0f64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        let mut any_move = false;

        loop {
            order.shuffle(rng);
            let mut moved = false;
            for &i in &order {
                let own = community[i];
                let k = strength[i];
                for &(j, w) in &self.links[i] {
                    let c = community[j];
                    if link_to[c] == 0.0 {
                        touched.push(c);
                    }
                    link_to[c] += w;
                }
                total[own] -= k;
                let gain = |c: usize, link: f64| link - total[c] * k / two_m;
                let mut best = own;
                let mut best_gain = gain(own, link_to[own]);
                for &c in &touched {
                    let g = gain(c, link_to[c]);
                    if (g - best_gain) / m > MODULARITY_TOLERANCE {
                        best = c;
                        best_gain = g;
                    }
                }
                total[best] += k;
                community[i] = best;
                if best != own {
                    moved = true;
                }
                for &c in &touched {
                    link_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        (community, any_move)
    }

    /// Collapses communities into nodes. `community` must be dense.
    fn aggregate(&self, community: &[usize], count: usize) -> LevelGraph {
        let mut self_weight = vec![0.0; count];
        let mut triples: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..self.len() {
            let ci = community[i];
            self_weight[ci] += self.self_weight[i];
            for &(j, w) in &self.links[i] {
                let cj = community[j];
                if ci == cj {
                    // each undirected link is seen from both ends
                    self_weight[ci] += w / 2.0;
                } else {
                    triples.push((ci, cj, w));
                }
            }
        }
        triples.sort_by_key(|t| (t.0, t.1));
        let mut links = vec![Vec::new(); count];
        for (a, b, w) in triples {
            match links[a].last_mut() {
                Some((last, acc)) if *last == b => *acc += w,
                _ => links[a].push((b, w)),
            }
        }
        LevelGraph { links, self_weight }
    }
}

fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut index = HashMap::new();
    let dense = labels
        .iter()
        .map(|&l| {
            let next = index.len();
            *index.entry(l).or_insert(next)
        })
        .collect();
    (dense, index.len())
}

/// Louvain levels from finest to coarsest; each entry maps original users to
/// their community at that level. The last entry is the final partition.
pub fn louvain_hierarchy(g: &SocialGraph, seed: u64) -> Vec<Mapping> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = LevelGraph::from_social(g);
    let mut membership: Vec<usize> = (0..g.node_count()).collect();
    let mut levels = Vec::new();
    loop {
        let (community, moved) = level.local_moves(&mut rng);
        if !moved {
            break;
        }
        let (dense, count) = densify(&community);
        for c in membership.iter_mut() {
            *c = dense[*c];
        }
        levels.push(Mapping::from_labels(&membership));
        if count == level.len() {
            break;
        }
        level = level.aggregate(&dense, count);
    }
    if levels.is_empty() {
        levels.push(Mapping::singletons(g.node_count()));
    }
    levels
}

/// Standard two-phase Louvain modularity optimisation with a seeded node
/// visit order.
pub fn louvain(g: &SocialGraph, seed: u64) -> Mapping {
    louvain_hierarchy(g, seed)
        .pop()
        .expect("hierarchy is never empty")
}

pub(crate) fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 step
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Louvain, then Louvain again on every community larger than `max_size`,
/// recursively. A community that Louvain returns unsplit is kept as is, so
/// some communities may stay above the cap.
pub fn recursive_louvain(
    g: &SocialGraph,
    max_size: usize,
    seed: u64,
) -> Result<Mapping, CommunityError> {
    if max_size < 2 {
        return Err(CommunityError::MaxSizeTooSmall(max_size));
    }
    let mut labels = vec![0usize; g.node_count()];
    let mut next_label = 0usize;
    let mut stack: Vec<Vec<UserId>> = louvain(g, seed).members();
    stack.reverse();
    let mut splits = 0u64;
    while let Some(members) = stack.pop() {
        let finished = members.len() <= max_size || {
            splits += 1;
            let (sub, _) = g.induced_subgraph(&members);
            let parts = louvain(&sub, derive_seed(seed, splits));
            if parts.peer_count() <= 1 {
                true
            } else {
                // sub ids are ascending positions in `members`
                let mut children: Vec<Vec<UserId>> = parts
                    .members()
                    .into_iter()
                    .map(|c| c.into_iter().map(|i| members[i]).collect())
                    .collect();
                children.reverse();
                stack.extend(children);
                false
            }
        };
        if finished {
            for &u in &members {
                labels[u] = next_label;
            }
            next_label += 1;
        }
    }
    Ok(Mapping::from_labels(&labels))
}

/// Why a merge stopped short of the requested mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MergeWarning {
    /// No two remaining communities share an edge, so merging cannot go on.
    NoConnectedPair { community_count: usize },
    /// The achieved mean lies outside the ±10% band around the target.
    MeanOutsideTolerance { achieved: f64 },
}

#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub mapping: Mapping,
    pub warning: Option<MergeWarning>,
}

/// Greedily merges the smallest community with its smallest socially
/// connected neighbour until at most `ceil(n / target_avg)` communities remain.
///
/// Ties: smallest community by `(size, id)`; its partner by size, then most
/// shared edges, then id. The merged community keeps the smaller id, so
/// running to target A and then to target B gives the same result as running
/// straight to B.
pub fn merge_to_target(
    g: &SocialGraph,
    m: &Mapping,
    target_avg: usize,
) -> Result<MergeOutcome, CommunityError> {
    m.check_covers(g)?;
    if target_avg == 0 {
        return Err(CommunityError::ZeroTarget);
    }
    let mean = m.mean_size();
    if (target_avg as f64) < mean - 1e-9 {
        return Err(CommunityError::TargetBelowMean {
            target: target_avg,
            mean,
        });
    }
    let n = g.node_count();
    let target_count = n.div_ceil(target_avg).max(1);

    let count = m.peer_count();
    let mut size = m.sizes();
    let mut links: Vec<HashMap<usize, u64>> = vec![HashMap::new(); count];
    for (u, v) in g.edges() {
        let (a, b) = (m.peer_of(u), m.peer_of(v));
        if a != b {
            *links[a].entry(b).or_default() += 1;
            *links[b].entry(a).or_default() += 1;
        }
    }
    let mut parent: Vec<usize> = (0..count).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..count).map(|c| (size[c], c)).collect();
    let mut alive = count;
    let mut stuck = false;

    while alive > target_count {
        let Some(&(small_size, small)) = queue.iter().find(|&&(_, c)| !links[c].is_empty())
        else {
            stuck = true;
            break;
        };
        let partner = links[small]
            .iter()
            .map(|(&c, &shared)| (size[c], std::cmp::Reverse(shared), c))
            .min()
            .map(|(_, _, c)| c)
            .expect("non-empty neighbourhood");
        let (keep, gone) = if small < partner {
            (small, partner)
        } else {
            (partner, small)
        };
        queue.remove(&(small_size, small));
        queue.remove(&(size[partner], partner));
        size[keep] += size[gone];
        size[gone] = 0;
        queue.insert((size[keep], keep));

        let moved = std::mem::take(&mut links[gone]);
        links[keep].remove(&gone);
        for (c, w) in moved {
            if c == keep {
                continue;
            }
            let back = links[c].remove(&gone).unwrap_or(0);
            debug_assert_eq!(back, w);
            *links[c].entry(keep).or_default() += w;
            *links[keep].entry(c).or_default() += w;
        }
        parent[gone] = keep;
        alive -= 1;
    }

    let root = |mut c: usize| {
        while parent[c] != c {
            c = parent[c];
        }
        c
    };
    let labels: Vec<usize> = (0..n).map(|u| root(m.peer_of(u))).collect();
    let mapping = Mapping::from_labels(&labels);
    let achieved = mapping.mean_size();
    let warning = if stuck {
        Some(MergeWarning::NoConnectedPair {
            community_count: mapping.peer_count(),
        })
    } else if (achieved - target_avg as f64).abs() > TARGET_TOLERANCE * target_avg as f64 {
        Some(MergeWarning::MeanOutsideTolerance { achieved })
    } else {
        None
    };
    Ok(MergeOutcome { mapping, warning })
}

/// Multi-group membership trace: groups sorted by external id, members as
/// internal user ids.
#[derive(Debug, Clone, Default)]
pub struct GroupMemberships {
    group_ids: Vec<u64>,
    members: Vec<Vec<UserId>>,
}

impl GroupMemberships {
    /// Builds memberships from `(group external id, user)` pairs.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (u64, UserId)>,
    {
        let mut pairs: Vec<(u64, UserId)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        let mut out = GroupMemberships::default();
        for (gid, u) in pairs {
            if out.group_ids.last() != Some(&gid) {
                out.group_ids.push(gid);
                out.members.push(Vec::new());
            }
            out.members.last_mut().expect("pushed").push(u);
        }
        out
    }

    pub fn group_count(&self) -> usize {
        self.group_ids.len()
    }

    pub fn group_id(&self, index: usize) -> u64 {
        self.group_ids[index]
    }

    pub fn members(&self, index: usize) -> &[UserId] {
        &self.members[index]
    }
}

/// Reads `group_id<TAB>user_id` lines. Users absent from `g` are skipped.
pub fn parse_groups<R: BufRead>(
    reader: R,
    g: &SocialGraph,
) -> Result<GroupMemberships, CommunityError> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut tok = t.split_whitespace();
        let parsed = tok
            .next()
            .and_then(|a| a.parse::<u64>().ok())
            .zip(tok.next().and_then(|b| b.parse::<u64>().ok()));
        let Some((gid, user)) = parsed else {
            return Err(CommunityError::Malformed {
                line: idx + 1,
                reason: format!("expected group_id and user_id, found {t:?}"),
            });
        };
        if let Some(u) = g.internal_id(user) {
            pairs.push((gid, u));
        }
    }
    Ok(GroupMemberships::from_pairs(pairs))
}

fn jaccard(friends: &[u32], group: &[UserId]) -> f64 {
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < friends.len() && j < group.len() {
        match (friends[i] as usize).cmp(&group[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = friends.len() + group.len() - common;
    if union == 0 {
        0.0
    } else {
        common as f64 / union as f64
    }
}

/// Assigns each user to the group maximising the Jaccard similarity between
/// the user's friends and the group's members; ties go to the smaller group
/// id. Groups that end up empty are dropped.
pub fn jaccard_assign(
    g: &SocialGraph,
    groups: &GroupMemberships,
) -> Result<Mapping, CommunityError> {
    let n = g.node_count();
    let mut user_groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (gi, members) in groups.members.iter().enumerate() {
        for &u in members {
            user_groups[u].push(gi);
        }
    }
    let mut labels = Vec::with_capacity(n);
    for (u, candidates) in user_groups.iter().enumerate() {
        let friends = g.neighbors(u);
        let mut best: Option<(f64, usize)> = None;
        for &gi in candidates {
            let score = jaccard(friends, &groups.members[gi]);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, gi));
            }
        }
        match best {
            Some((_, gi)) => labels.push(gi),
            None => return Err(CommunityError::UserWithoutGroup(g.external_id(u))),
        }
    }
    Ok(Mapping::from_labels(&labels))
}

/// Reads a `user_external_id,peer_id` CSV. Users not in `g` are ignored;
/// every user of `g` must appear exactly once. Peer labels are densified.
pub fn parse_mapping_csv<R: BufRead>(
    reader: R,
    g: &SocialGraph,
) -> Result<Mapping, CommunityError> {
    let mut labels: Vec<Option<usize>> = vec![None; g.node_count()];
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with("user_external_id") {
            continue;
        }
        let mut fields = t.split(',').map(str::trim);
        let parsed = fields
            .next()
            .and_then(|a| a.parse::<u64>().ok())
            .zip(fields.next().and_then(|b| b.parse::<usize>().ok()));
        let Some((user, peer)) = parsed else {
            return Err(CommunityError::Malformed {
                line: idx + 1,
                reason: format!("expected user_external_id,peer_id, found {t:?}"),
            });
        };
        if let Some(u) = g.internal_id(user) {
            if labels[u].replace(peer).is_some() {
                return Err(CommunityError::DuplicateUser(user));
            }
        }
    }
    let mut dense = Vec::with_capacity(labels.len());
    for (u, l) in labels.into_iter().enumerate() {
        dense.push(l.ok_or(CommunityError::UnmappedUser(g.external_id(u)))?);
    }
    Ok(Mapping::from_labels(&dense))
}

/// Writes the `user_external_id,peer_id` CSV.
pub fn write_mapping_csv<W: Write>(g: &SocialGraph, m: &Mapping, mut out: W) -> io::Result<()> {
    writeln!(out, "user_external_id,peer_id")?;
    for u in 0..m.user_count() {
        writeln!(out, "{},{}", g.external_id(u), m.peer_of(u))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_cliques_with_bridge;

    fn clique(n: usize) -> SocialGraph {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        SocialGraph::from_edges(n, edges).unwrap()
    }

    /// All set partitions of `0..n` as label vectors (restricted growth strings).
    fn all_partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for l in 0..=max + 1 {
                cur.push(l);
                rec(i + 1, n, cur, max.max(l), out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n > 0 {
            rec(1, n, &mut vec![0], 0, &mut out);
        }
        out
    }

    fn brute_force_best(g: &SocialGraph) -> (f64, Vec<usize>) {
        all_partitions(g.node_count())
            .into_iter()
            .map(|p| (modularity(g, &Mapping::from_labels(&p)).unwrap(), p))
            .fold((f64::NEG_INFINITY, Vec::new()), |best, cur| {
                if cur.0 > best.0 + 1e-12 {
                    cur
                } else {
                    best
                }
            })
    }

    #[test]
    fn modularity_trivial_partitions() {
        let g = two_cliques_with_bridge();
        let one = modularity(&g, &Mapping::single_peer(8)).unwrap();
        assert!(one.abs() < 1e-15);
        let m = g.edge_count() as f64;
        let expected: f64 =
            -(0..8).map(|u| (g.degree(u).unwrap() as f64).powi(2)).sum::<f64>() / (4.0 * m * m);
        let single = modularity(&g, &Mapping::singletons(8)).unwrap();
        assert!((single - expected).abs() < 1e-12);
    }

    #[test]
    fn modularity_rejects_mismatch_and_empty() {
        let g = two_cliques_with_bridge();
        assert!(matches!(
            modularity(&g, &Mapping::singletons(3)),
            Err(CommunityError::MappingSize { .. })
        ));
        let empty = SocialGraph::from_edges(2, []).unwrap();
        assert!(matches!(
            modularity(&empty, &Mapping::singletons(2)),
            Err(CommunityError::EmptyGraph)
        ));
    }

    #[test]
    fn clique_partition_is_brute_force_optimum() {
        let g = two_cliques_with_bridge();
        let (best_q, best) = brute_force_best(&g);
        let cliques = Mapping::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(Mapping::from_labels(&best), cliques);
        let q = modularity(&g, &cliques).unwrap();
        assert!((q - best_q).abs() < 1e-12);
        // 2 * (6/13 - (13/26)^2)
        assert!((q - (12.0 / 13.0 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn louvain_finds_brute_force_partitions() {
        let k5 = clique(5);
        let (_, best) = brute_force_best(&k5);
        assert_eq!(Mapping::from_labels(&best).peer_count(), 1);
        for seed in 0..10 {
            assert_eq!(louvain(&k5, seed).peer_count(), 1);
            let m = louvain(&two_cliques_with_bridge(), seed);
            assert_eq!(m, Mapping::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1]));
        }
    }

    #[test]
    fn louvain_without_edges_is_singletons() {
        let g = SocialGraph::from_edges(3, []).unwrap();
        assert_eq!(louvain(&g, 1), Mapping::singletons(3));
    }

    #[test]
    fn recursive_louvain_respects_small_graphs() {
        let k5 = clique(5);
        assert_eq!(recursive_louvain(&k5, 100, 3).unwrap(), louvain(&k5, 3));
        assert!(matches!(
            recursive_louvain(&k5, 1, 3),
            Err(CommunityError::MaxSizeTooSmall(1))
        ));
    }

    #[test]
    fn recursive_louvain_splits_oversized_and_keeps_unsplittable() {
        let g = two_cliques_with_bridge();
        // whole graph as one oversized community is split into the cliques;
        // each 4-clique is unsplittable and stays above max_size = 2
        let m = recursive_louvain(&g, 2, 5).unwrap();
        assert_eq!(m, Mapping::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1]));
    }

    #[test]
    fn merge_path_example() {
        let g = SocialGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = Mapping::from_labels(&[0, 0, 1, 2]);
        let out = merge_to_target(&g, &m, 2).unwrap();
        assert_eq!(out.mapping, Mapping::from_labels(&[0, 0, 1, 1]));
        assert!(out.warning.is_none());
        assert_eq!(out.mapping.mean_size(), 2.0);
    }

    #[test]
    fn merge_no_op_when_target_equals_mean() {
        let g = two_cliques_with_bridge();
        let m = Mapping::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1]);
        let out = merge_to_target(&g, &m, 4).unwrap();
        assert_eq!(out.mapping, m);
        assert!(matches!(
            merge_to_target(&g, &m, 3),
            Err(CommunityError::TargetBelowMean { .. })
        ));
    }

    #[test]
    fn merge_beyond_graph_size_flags_mean() {
        let g = two_cliques_with_bridge();
        let out = merge_to_target(&g, &Mapping::singletons(8), 100).unwrap();
        assert_eq!(out.mapping.peer_count(), 1);
        assert!(matches!(
            out.warning,
            Some(MergeWarning::MeanOutsideTolerance { .. })
        ));
    }

    #[test]
    fn merge_on_disconnected_communities_reports_stuck() {
        let g = SocialGraph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let out = merge_to_target(&g, &Mapping::singletons(4), 4).unwrap();
        assert_eq!(out.mapping.peer_count(), 2);
        assert!(matches!(
            out.warning,
            Some(MergeWarning::NoConnectedPair { community_count: 2 })
        ));
    }

    #[test]
    fn merge_chaining_equals_direct() {
        let g = two_cliques_with_bridge();
        let base = Mapping::singletons(8);
        let step = merge_to_target(&g, &base, 2).unwrap().mapping;
        let chained = merge_to_target(&g, &step, 4).unwrap().mapping;
        let direct = merge_to_target(&g, &base, 4).unwrap().mapping;
        assert_eq!(chained, direct);
    }

    #[test]
    fn jaccard_prefers_overlapping_group() {
        // u=0 with friends {1,2,3}; G1 = {0,1,2,4}, G2 = {0,5}
        let g = SocialGraph::from_edges(6, [(0, 1), (0, 2), (0, 3), (4, 5)]).unwrap();
        let groups = GroupMemberships::from_pairs([
            (1, 0),
            (1, 1),
            (1, 2),
            (1, 4),
            (2, 0),
            (2, 5),
            (2, 3),
        ]);
        let m = jaccard_assign(&g, &groups).unwrap();
        // user 0: J(G1) = 2/5, J(G2) = 1/5 (friend 3 is in G2)
        assert_eq!(m.peer_of(0), m.peer_of(1));
        assert_eq!(m.peer_count(), 2);
    }

    #[test]
    fn jaccard_basic_example_and_errors() {
        assert_eq!(jaccard(&[0, 1, 2], &[0, 1, 3]), 0.5);
        assert_eq!(jaccard(&[0, 1, 2], &[9]), 0.0);
        let g = SocialGraph::from_edges(2, [(0, 1)]).unwrap();
        let only_one = GroupMemberships::from_pairs([(7, 0)]);
        assert!(matches!(
            jaccard_assign(&g, &only_one),
            Err(CommunityError::UserWithoutGroup(1))
        ));
        let both = GroupMemberships::from_pairs([(7, 0), (3, 1), (7, 1)]);
        // user 1: friends {0}; G3={1}: 0/2, G7={0,1}: 1/2
        let m = jaccard_assign(&g, &both).unwrap();
        assert_eq!(m.peer_count(), 1);
    }

    #[test]
    fn jaccard_ties_go_to_smaller_group_id() {
        let g = SocialGraph::from_edges(3, [(1, 2)]).unwrap();
        let groups = GroupMemberships::from_pairs([(9, 0), (4, 0), (4, 1), (4, 2)]);
        let m = jaccard_assign(&g, &groups).unwrap();
        // user 0 has no friends: both groups score 0, group 4 wins; group 9 empties
        assert_eq!(m.peer_count(), 1);
    }

    #[test]
    fn group_file_parsing() {
        let g = SocialGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let gm = parse_groups("# groups\n5\t0\n5\t1\n2 2\n5\t99\n".as_bytes(), &g).unwrap();
        assert_eq!(gm.group_count(), 2);
        assert_eq!(gm.group_id(0), 2);
        assert_eq!(gm.members(1), &[0, 1]);
        assert!(parse_groups("x\n".as_bytes(), &g).is_err());
    }

    #[test]
    fn mapping_csv_round_trip_and_errors() {
        let g = SocialGraph::with_external_ids(vec![10, 20, 30], [(0, 1), (1, 2)]).unwrap();
        let m = Mapping::from_labels(&[0, 1, 0]);
        let mut buf = Vec::new();
        write_mapping_csv(&g, &m, &mut buf).unwrap();
        assert_eq!(parse_mapping_csv(buf.as_slice(), &g).unwrap(), m);
        assert!(matches!(
            parse_mapping_csv("10,0\n20,1\n".as_bytes(), &g),
            Err(CommunityError::UnmappedUser(30))
        ));
        assert!(matches!(
            parse_mapping_csv("10,0\n10,1\n".as_bytes(), &g),
            Err(CommunityError::DuplicateUser(10))
        ));
    }

    #[test]
    fn stats_of_sizes() {
        let s = PartitionStats::from_sizes(&[2, 4, 6]);
        assert_eq!(s.community_count, 3);
        assert_eq!(s.mean_size, 4.0);
        assert!((s.std_dev_size - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!((s.min_size, s.max_size), (2, 6));
    }
}
